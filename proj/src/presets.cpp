#include "gradcon/scenario.hpp"

namespace gradcon {

// Kept in sync with presets/*.toml (a unit test compares them).
const std::vector<std::pair<std::string, std::string>>& preset_texts() {
  static const std::vector<std::pair<std::string, std::string>> presets = {
      {"torsion-disc-R1", R"(name = "torsion-disc-R1"
description = "Unit disc, unit ball constraint, f = 1: the constraint never binds"

[domain]
kind = "disc"
radius = 1.0

[body]
kind = "ball"
radius = 1.0

[operator]
kind = "poisson"
f = 1.0

[grid]
h = 0.03125

[solver]
eps_cells = [3.0]
delta = 0.0625

[checks]
run = ["assumptions", "datum", "theorem2", "prop_3_5", "prop_3_3", "comparison"]
)"},
      {"torsion-disc-R3", R"(name = "torsion-disc-R3"
description = "Disc of radius 3, f = 1: plastic annulus 2 < r < 3"

[domain]
kind = "disc"
radius = 3.0

[body]
kind = "ball"
radius = 1.0

[operator]
kind = "poisson"
f = 1.0

[grid]
h = 0.03125

[solver]
eps_cells = [3.0]
delta = 0.0625

[checks]
run = ["assumptions", "datum", "theorem2", "prop_3_5", "prop_3_3", "lemma_3_2", "comparison", "free_boundary"]
)"},
      {"torsion-square-constraint", R"(name = "torsion-square-constraint"
description = "Polygonal constraint set K° = L1 ball, approximated by smooth bodies"

[domain]
kind = "disc"
radius = 2.0

[body]
given = "K_polar"
kind = "polygon"
vertices = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]
smoothing = [4, 8, 16, 32]

[operator]
kind = "poisson"
f = 1.0

[grid]
h = 0.03125

[solver]
eps_cells = [3.0]
delta = 0.0625

[checks]
run = ["assumptions", "datum", "theorem2", "prop_3_3", "pipeline"]
)"},
      {"ellipse-ridge", R"(name = "ellipse-ridge"
description = "Ellipse (2, 1): the ridge of the distance function is the focal segment"

[domain]
kind = "ellipse"
a = 2.0
b = 1.0

[body]
kind = "ball"
radius = 1.0

[operator]
kind = "poisson"
f = 2.0

[grid]
h = 0.03125

[solver]
eps_cells = [3.0]
delta = 0.0625

[checks]
run = ["assumptions", "datum", "theorem2", "prop_3_3", "monotonicity"]
)"},
      {"pucci-disc", R"(name = "pucci-disc"
description = "Convex Pucci operator on a disc"

[domain]
kind = "disc"
radius = 2.0

[body]
kind = "ball"
radius = 1.0

[operator]
kind = "pucci_plus"
lambda = 1.0
Lambda = 2.0
f = 2.0

[grid]
h = 0.03125

[solver]
eps_cells = [3.0]
delta = 0.0625

[checks]
run = ["assumptions", "datum", "theorem2", "prop_3_3", "comparison"]
)"},
      {"bellman-disc", R"(name = "bellman-disc"
description = "Maximum of two anisotropic linear operators"

[domain]
kind = "disc"
radius = 2.0

[body]
kind = "ball"
radius = 1.0

[operator]
kind = "bellman"

[[operator.family]]
A = [[1.0, 0.0], [0.0, 0.5]]
f = 1.0

[[operator.family]]
A = [[0.5, 0.0], [0.0, 1.0]]
f = 1.0

[grid]
h = 0.03125

[solver]
eps_cells = [3.0]
delta = 0.0625

[checks]
run = ["assumptions", "datum", "theorem2", "prop_3_3", "comparison"]
)"},
      {"affine-phi-disc", R"(name = "affine-phi-disc"
description = "Affine boundary datum, anisotropic constraint"

[domain]
kind = "disc"
radius = 2.0

[body]
kind = "ellipse"
axes = [1.25, 0.8]

[phi]
kind = "affine"
c = [0.3, 0.1]
c0 = 0.0

[operator]
kind = "poisson"
f = 1.5

[grid]
h = 0.03125

[solver]
eps_cells = [3.0]
delta = 0.0625

[checks]
run = ["assumptions", "datum", "theorem2", "prop_3_3", "comparison"]
)"},
      {"appendix-xdep-linear", R"(name = "appendix-xdep-linear"
description = "x-dependent linear operator between two quadratic obstacles"

[domain]
kind = "disc"
radius = 1.0

[body]
kind = "ball"
radius = 1.0

[operator]
kind = "linear_x"

[obstacles]
kind = "quadratic"
scale = 0.5

[grid]
h = 0.03125

[solver]
eps_cells = [3.0]
delta = 0.0625

[checks]
run = ["assumptions", "comparison"]
)"},
      {"broken-operator", R"(name = "broken-operator"
description = "Operator with the wrong sign on the Hessian; the assumption check must reject it"

[domain]
kind = "disc"
radius = 1.0

[body]
kind = "ball"
radius = 1.0

[operator]
kind = "broken_trace"
f = 1.0

[grid]
h = 0.03125

[checks]
run = ["assumptions", "theorem2"]
)"},
  };
  return presets;
}

}  // namespace gradcon

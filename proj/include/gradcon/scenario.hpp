#pragma once

#include "gradcon/convex_body.hpp"
#include "gradcon/domain.hpp"
#include "gradcon/operators.hpp"
#include "gradcon/penalty.hpp"

#include <string>
#include <vector>

namespace gradcon {

struct DomainSpec {
  std::string kind = "disc";
  double radius = 1, a = 1, b = 1, width = 2, height = 2, corner = 0.25, r0 = 1, amp = 0;
  int m = 5;
  Domain2D build() const;
};

struct BodySpec {
  bool given_polar = false;  // the body below is K° rather than K
  std::string kind = "ball";
  double radius = 1, p = 2, scale = 1;
  std::vector<double> axes;
  std::vector<Vec2> vertices;
  std::vector<int> smoothing;  // approximation levels for a polygonal K°
  ConvexBody build() const;    // the body as given
};

struct PhiSpec {
  std::string kind = "zero";
  Vec2 c = Vec2::Zero();
  double c0 = 0;
  Mat2 Q = Mat2::Zero();
  BoundaryDatum build() const;
};

struct OperatorSpec {
  std::string kind = "poisson";
  double f = 0, lambda = 1, Lambda = 1;
  LinearCoeffs lin;
  std::vector<LinearCoeffs> family;
  EllipticOperator build() const;
};

struct ObstacleSpec {
  std::string kind = "gauge";  // gauge: rho and -rho_bar; quadratic: +-scale (R^2 - |x|^2) / (2R) on a disc
  double scale = 1;
};

struct GridSpec {
  double h = 0;
  int n = 0;  // cells across the smaller side of the bounding box, used when h = 0
  double resolve(const Domain2D& dom) const;
};

struct SolverSpec {
  std::vector<double> eps_cells{3.0};  // mollification radii in units of h, strictly decreasing
  double delta0 = 1.0, delta = 1.0 / 16;
  double newton_tol = 1e-8;
  int max_iters = 80;
};

struct Scenario {
  std::string name, description;
  DomainSpec domain;
  BodySpec body;
  PhiSpec phi;
  OperatorSpec op;
  ObstacleSpec obstacles;
  GridSpec grid;
  SolverSpec solver;
  std::vector<std::string> checks;
  unsigned seed = 7;
  std::vector<std::string> warnings;

  // Canonical text form; parses back to the same scenario.
  std::string to_text() const;
};

struct ParseIssue {
  int line = 0;
  std::string message;
};

class ScenarioError : public Error {
 public:
  ScenarioError(ErrorKind kind, std::vector<ParseIssue> issues);
  const std::vector<ParseIssue>& issues() const { return issues_; }

 private:
  std::vector<ParseIssue> issues_;
};

const std::vector<std::string>& known_checks();

Scenario parse_scenario_text(const std::string& text);
Scenario parse_scenario(const std::string& path);

// Bundled presets: name -> scenario text.
const std::vector<std::pair<std::string, std::string>>& preset_texts();
bool is_preset(const std::string& name);
Scenario load_preset(const std::string& name);

}  // namespace gradcon

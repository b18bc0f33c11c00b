#include "gradcon/equivalence.hpp"

#include <doctest.h>

#include <cmath>

using namespace gradcon;

namespace {

struct Solved {
  Domain2D dom = Domain2D::disc(3);
  ConvexBody K = ConvexBody::ball(1);
  Grid2D g;
  ObstacleField up, lo;
  DoubleObstacleResult res;
  explicit Solved(double h)
      : g(make_grid(dom, h, 6)),
        up(build_obstacle(dom, K, BoundaryDatum::zero(), g, ObstacleSide::upper)),
        lo(build_obstacle(dom, K, BoundaryDatum::zero(), g, ObstacleSide::lower)) {
    PenaltyConfig c;
    c.delta = 1.0 / 16;
    res = solve_double_obstacle(EllipticOperator::poisson(1), make_obstacle_pair(up, lo, dom, 1.0), dom,
                                BoundaryDatum::zero(), c);
  }
};

const Solved& torsion() {
  static const Solved s(1.0 / 32);
  return s;
}

}  // namespace

TEST_CASE("coincidence sets partition the interior") {
  const Solved& s = torsion();
  const auto dec = decompose(s.res, s.up, s.lo, coincidence_tolerance(s.up, s.lo));
  for (int k = 0; k < s.g.size(); ++k) {
    const int n = dec.E[k] + dec.P_plus[k] + dec.P_minus[k];
    CHECK(n == (std::isfinite(s.res.u[k]) ? 1 : 0));
  }
  CHECK_FALSE(dec.free_boundary.empty());
}

TEST_CASE("masks are stable under halving tol_p") {
  const Solved& s = torsion();
  const double tp = coincidence_tolerance(s.up, s.lo);
  const auto a = decompose(s.res, s.up, s.lo, tp), b = decompose(s.res, s.up, s.lo, tp / 2);
  const auto band = a.band(2);
  for (int k = 0; k < s.g.size(); ++k)
    if (a.P_plus[k] != b.P_plus[k]) CHECK(band[k]);
}

TEST_CASE("torsion R = 3: structural checks") {
  const Solved& s = torsion();
  const double h = s.g.h;
  const auto dec = decompose(s.res, s.up, s.lo, coincidence_tolerance(s.up, s.lo));
  CHECK(check_theorem2(s.res, dec, s.K).passed());
  CHECK(check_prop_3_5(s.res, dec, s.K, h / 2).passed());
  CHECK(check_prop_3_3(dec, s.up, s.lo).passed());
  CHECK(check_lemma_3_2(s.res, dec, s.up, s.lo).passed());
  // |Du| = r / 2 reaches 1 at r* = 2
  const RadiusFit fit = fit_free_boundary_radius(s.res, Vec2::Zero());
  CHECK(std::abs(fit.mean - 2) <= 2 * h);
  CHECK(fit.stddev <= h);
  // gamma°(D_h u) <= 1 + tol_c everywhere
  const auto gc = gradient_constraint(s.res, s.K.polar(), s.res.tol_c);
  CHECK(gc.max_violation <= s.res.tol_c);
}

TEST_CASE("band grows with its width") {
  const Solved& s = torsion();
  const auto dec = decompose(s.res, s.up, s.lo, coincidence_tolerance(s.up, s.lo));
  const auto b1 = dec.band(1), b2 = dec.band(2);
  int n1 = 0, n2 = 0;
  for (int k = 0; k < s.g.size(); ++k) {
    n1 += b1[k];
    n2 += b2[k];
    if (b1[k]) CHECK(b2[k]);
  }
  CHECK(n2 > n1);
}

TEST_CASE("pipeline on a smooth constraint degenerates to one level") {
  PipelineOptions po;
  po.h = 1.0 / 32;
  po.refine = false;
  po.solver.delta = 1.0 / 16;
  const auto pr = run_approximation_pipeline(EllipticOperator::poisson(1), Domain2D::disc(1), BoundaryDatum::zero(),
                                             ConvexBody::ball(1), po);
  CHECK(pr.levels.size() == 1);
}

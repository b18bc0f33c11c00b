#include "gradcon/penalty.hpp"

#include <doctest.h>

#include <cmath>

using namespace gradcon;

namespace {

struct Torsion {
  Domain2D dom;
  Grid2D g;
  ObstacleField up, lo;
  ObstaclePair obs;
  Torsion(double R, double h)
      : dom(Domain2D::disc(R)),
        g(make_grid(dom, h, 6)),
        up(build_obstacle(dom, ConvexBody::ball(1), BoundaryDatum::zero(), g, ObstacleSide::upper)),
        lo(build_obstacle(dom, ConvexBody::ball(1), BoundaryDatum::zero(), g, ObstacleSide::lower)),
        obs(make_obstacle_pair(up, lo, dom, 1.0)) {}
};

PenaltyConfig quick() {
  PenaltyConfig c;
  c.delta = 1.0 / 16;
  return c;
}

}  // namespace

TEST_CASE("beta is a C1 bridge between 0 and t / delta") {
  const double d = 0.25;
  CHECK(beta(d, -1).value == 0);
  CHECK(beta(d, 0).value == 0);
  CHECK(beta(d, 0).derivative == doctest::Approx(0));
  CHECK(beta(d, d).value == doctest::Approx(1.0));
  CHECK(beta(d, d).derivative == doctest::Approx(1 / d));
  CHECK(beta(d, 2 * d).value == doctest::Approx(2.0));
  double prev = -1;
  for (int i = 0; i <= 100; ++i) {
    const double t = -0.1 + 0.5 * i / 100;
    const BetaValue b = beta(d, t);
    CHECK(b.value >= prev);
    prev = b.value;
    const double e = 1e-7;
    CHECK(b.derivative == doctest::Approx((beta(d, t + e).value - beta(d, t - e).value) / (2 * e)).epsilon(1e-5));
  }
}

TEST_CASE("mollified obstacles satisfy their invariants") {
  Torsion t(2, 1.0 / 32);
  const MollifiedObstacles mo = mollify_obstacles(t.obs, 3 * t.g.h);
  CHECK(mo.report.passed());
  CHECK(mo.delta_eps == doctest::Approx(3.5 * t.obs.C1 * mo.epsilon));
  for (int k = 0; k < t.g.size(); ++k)
    if (mo.U_eps[k]) {
      CHECK(mo.psi_minus_eps[k] < mo.psi_plus_eps[k]);
      CHECK(t.obs.inside[k]);
    }
  CHECK_THROWS_AS(mollify_obstacles(t.obs, t.g.h), Error);  // radius below 1.5 h
}

TEST_CASE("unit disc torsion is elastic and matches (1 - r^2) / 4") {
  const double h = 1.0 / 32;
  Torsion t(1, h);
  const DoubleObstacleResult r = solve_double_obstacle(EllipticOperator::poisson(1), t.obs, t.dom,
                                                       BoundaryDatum::zero(), quick());
  double err = 0;
  int plastic = 0;
  for (int k = 0; k < t.g.size(); ++k) {
    if (!std::isfinite(r.u[k])) continue;
    err = std::max(err, std::abs(r.u[k] - (1 - t.g.node(k).squaredNorm()) / 4));
    plastic += r.cls[k] == kPlasticPlus || r.cls[k] == kPlasticMinus;
  }
  CHECK(err <= 10 * h * h);
  CHECK(plastic == 0);
  CHECK(r.report.passed());
}

TEST_CASE("radius 3 torsion respects the obstacles and certifies") {
  const double h = 1.0 / 16;
  Torsion t(3, h);
  const EllipticOperator op = EllipticOperator::poisson(1);
  const DoubleObstacleResult r = solve_double_obstacle(op, t.obs, t.dom, BoundaryDatum::zero(), quick());
  CHECK(r.complementarity <= r.tol_c);
  for (int k = 0; k < t.g.size(); ++k)
    if (std::isfinite(r.u[k])) {
      CHECK(r.u[k] <= t.obs.plus[k] + 1e-12);
      CHECK(r.u[k] >= t.obs.minus[k] - 1e-12);
    }
  // recomputing from the field alone gives the same certificate
  const DoubleObstacleResult c = certify_solution(op, t.obs, t.dom, BoundaryDatum::zero(), r.u);
  CHECK(c.tol_c == r.tol_c);
  CHECK(c.complementarity == r.complementarity);
  CHECK(c.cls == r.cls);
  // comparison with the lower obstacle, a subsolution
  CHECK(comparison_check(r, t.obs.minus, op, t.obs).passed());
}

TEST_CASE("crossed obstacles and stalled iterations are reported") {
  Torsion t(1, 1.0 / 32);
  ObstaclePair bad = t.obs;
  std::swap(bad.plus, bad.minus);
  CHECK_THROWS_AS(solve_double_obstacle(EllipticOperator::poisson(1), bad, t.dom, BoundaryDatum::zero(), quick()),
                  Error);

  Torsion big(3, 1.0 / 16);
  PenaltyConfig c = quick();
  c.howard_max_iters = 1;
  c.newton.residual_tol = 1e-14;
  try {
    solve_double_obstacle(EllipticOperator::poisson(1), big.obs, big.dom, BoundaryDatum::zero(), c);
    FAIL("expected nonconvergence");
  } catch (const NonconvergenceError& e) {
    CHECK(e.history().size() >= 1);
    CHECK(static_cast<int>(e.last_iterate().size()) == big.g.size());
  }
}

TEST_CASE("penalized solutions: violation shrinks with delta") {
  Torsion t(3, 1.0 / 16);
  const MollifiedObstacles mo = mollify_obstacles(t.obs, 3 * t.g.h);
  PenaltyConfig c;
  c.delta0 = 1;
  c.delta = 1.0 / 64;
  const PenaltyResult p = solve_penalized(EllipticOperator::poisson(1), mo, c);
  REQUIRE(p.levels.size() == 7);
  for (std::size_t i = 1; i < p.levels.size(); ++i) CHECK(p.levels[i].violation_plus < p.levels[i - 1].violation_plus);
}

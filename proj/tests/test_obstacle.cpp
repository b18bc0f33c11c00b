#include "gradcon/obstacle.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace gradcon;

TEST_CASE("disc, ball, zero datum: rho is the distance") {
  const Domain2D d = Domain2D::disc(1.5);
  const Grid2D g = make_grid(d, 1.0 / 32, 2);
  const auto up = build_obstacle(d, ConvexBody::ball(1), BoundaryDatum::zero(), g, ObstacleSide::upper);
  const auto lo = build_obstacle(d, ConvexBody::ball(1), BoundaryDatum::zero(), g, ObstacleSide::lower);
  for (int k = 0; k < g.size(); ++k) {
    if (!d.contains(g.node(k))) continue;
    CHECK(up.values[k] == doctest::Approx(1.5 - g.node(k).norm()).epsilon(1e-6));
    CHECK(lo.values[k] == doctest::Approx(-(1.5 - g.node(k).norm())).epsilon(1e-6));
  }
  // the ridge of the disc is its centre
  for (int k = 0; k < g.size(); ++k)
    if (up.ridge[k]) CHECK(g.node(k).norm() <= 2.5 * g.h);
}

TEST_CASE("affine datum against a dense brute-force envelope") {
  const Domain2D d = Domain2D::ellipse(1.5, 1);
  const ConvexBody K = ConvexBody::ellipse({1.0, 0.7});
  const BoundaryDatum phi = BoundaryDatum::affine(Vec2(0.2, -0.1));
  const Grid2D g = make_grid(d, 1.0 / 16, 2);
  const auto up = build_obstacle(d, K, phi, g, ObstacleSide::upper);
  const auto dense = d.sample(10 * d.recommended_samples(g.h));
  for (int k = 0; k < g.size(); k += 7) {
    const Vec2 x = g.node(k);
    if (!d.contains(x)) continue;
    double best = 1e300;
    for (const auto& y : dense) best = std::min(best, K.gauge(Vec2(x - y.point)) + phi.value(y.point));
    CHECK(std::abs(up.values[k] - best) <= 1e-4);
  }
}

TEST_CASE("lambda and mu for the ball with zero datum") {
  const Domain2D d = Domain2D::disc(2);
  const BoundarySample y = d.at(0.7);
  const LambdaMu lm = lambda_mu(ConvexBody::ball(1), BoundaryDatum::zero(), y);
  CHECK(lm.lambda == doctest::Approx(1.0));
  CHECK((lm.mu - y.normal).norm() < 1e-12);
}

TEST_CASE("interior Hessian of the disc distance") {
  const Domain2D d = Domain2D::disc(2);
  const Grid2D g = make_grid(d, 1.0 / 16, 2);
  const auto up = build_obstacle(d, ConvexBody::ball(1), BoundaryDatum::zero(), g, ObstacleSide::upper);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.3, 1.3);
  for (int t = 0; t < 50; ++t) {
    const Vec2 x(U(rng), U(rng));
    if (x.norm() < 0.3 || x.norm() > 1.8) continue;
    const InteriorHessian ih = d2rho_interior(up, x);
    // D^2 (R - |x|) = -(I - x x^T / |x|^2) / |x|
    const Vec2 n = x.normalized();
    const Mat2 oracle = -(Mat2::Identity() - n * n.transpose()) / x.norm();
    CHECK((ih.d2rho - oracle).norm() <= 1e-6);
    CHECK(ih.depth == doctest::Approx(2 - x.norm()).epsilon(1e-8));
  }
}

TEST_CASE("second derivative along characteristics decreases") {
  const Domain2D d = Domain2D::ellipse(2, 1);
  const Grid2D g = make_grid(d, 1.0 / 16, 2);
  const auto up = build_obstacle(d, ConvexBody::p_ball(3, 1), BoundaryDatum::zero(), g, ObstacleSide::upper);
  const MonotonicityReport r = monotonicity_check(up, 200, 5);
  CHECK(r.violations == 0);
  CHECK(r.report.passed());
}

TEST_CASE("closest points: one on a generic node, two on the ellipse axis") {
  const Domain2D d = Domain2D::ellipse(2, 1);
  const Grid2D g = make_grid(d, 1.0 / 16, 2);
  const auto up = build_obstacle(d, ConvexBody::ball(1), BoundaryDatum::zero(), g, ObstacleSide::upper);
  CHECK(up.closest_points(Vec2(0.5, 0.0)).is_multiple);
  CHECK_FALSE(up.closest_points(Vec2(0.5, 0.5)).is_multiple);
}

TEST_CASE("weak ridge on the minor axis for a p-ball") {
  // The polar of the p = 3 ball is not C^2 in the axis directions, so two
  // closest points split off (0, -1) immediately; the gradient jump is small.
  const Domain2D d = Domain2D::ellipse(2, 1);
  const Grid2D g = make_grid(d, 1.0 / 64, 2);
  const auto up = build_obstacle(d, ConvexBody::p_ball(3, 1), BoundaryDatum::zero(), g, ObstacleSide::upper);
  for (double y : {-0.6, -0.5, -0.4}) {
    bool hit = false;
    for (int k = 0; k < g.size(); ++k)
      if (up.ridge[k] && std::abs(g.node(k).x()) <= 1.5 * g.h && std::abs(g.node(k).y() - y) <= g.h) hit = true;
    CHECK(hit);
  }
  // away from both axes nothing is flagged
  const int i = static_cast<int>(std::lround((0.8 - g.x0) / g.h));
  const int j = static_cast<int>(std::lround((0.5 - g.y0) / g.h));
  CHECK_FALSE(up.ridge[g.index(i, j)]);
}

#include "gradcon/domain.hpp"
#include "gradcon/grid.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace gradcon;

TEST_CASE("disc geometry") {
  const Domain2D d = Domain2D::disc(2);
  CHECK(d.perimeter() == doctest::Approx(4 * M_PI).epsilon(1e-10));
  CHECK(d.contains(Vec2(1.9, 0)));
  CHECK_FALSE(d.contains(Vec2(1.5, 1.5)));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-3, 3);
  for (int t = 0; t < 200; ++t) {
    const Vec2 x(U(rng), U(rng));
    CHECK(d.signed_distance(x) == doctest::Approx(2 - x.norm()).epsilon(1e-9));
  }
  const BoundarySample s = d.at(0.3);
  CHECK(s.curvature == doctest::Approx(0.5));
  CHECK((s.normal + s.point.normalized()).norm() < 1e-12);  // inward
}

TEST_CASE("ellipse perimeter and curvature") {
  const double a = 2, b = 1;
  const Domain2D e = Domain2D::ellipse(a, b);
  // composite Simpson on the speed, independent of the library's quadrature
  const int n = 20000;
  double L = 0;
  for (int i = 0; i <= n; ++i) {
    const double t = 2 * M_PI * i / n;
    const double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
    L += w * std::hypot(a * std::sin(t), b * std::cos(t));
  }
  L *= 2 * M_PI / n / 3;
  CHECK(e.perimeter() == doctest::Approx(L).epsilon(1e-9));
  CHECK(e.at(0).curvature == doctest::Approx(a / (b * b)));
  CHECK(e.at(M_PI / 2).curvature == doctest::Approx(b / (a * a)));
  CHECK(e.param_at_arclength(e.arclength(1.1)) == doctest::Approx(1.1).epsilon(1e-9));
}

TEST_CASE("projection onto an ellipse is a foot of the normal") {
  const Domain2D e = Domain2D::ellipse(2, 1);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  for (int t = 0; t < 100; ++t) {
    const Vec2 x(U(rng), 0.6 * U(rng));
    if (!e.contains(x)) continue;
    const DistanceResult r = e.euclidean_distance(x);
    // brute force over a dense boundary sample
    double best = 1e9;
    for (int i = 0; i < 20000; ++i) best = std::min(best, (x - e.point(2 * M_PI * i / 20000)).norm());
    CHECK(r.d == doctest::Approx(best).epsilon(1e-6));
  }
}

TEST_CASE("datum admissibility") {
  const Domain2D d = Domain2D::disc(1);
  const ConvexBody K = ConvexBody::ball(1);
  CHECK(check_datum(d, BoundaryDatum::zero(), K, 256, 500, 1, true).passed());
  CHECK(check_datum(d, BoundaryDatum::affine(Vec2(0.3, 0.2)), K, 256, 500, 1, false).passed());
  // a slope steeper than the constraint cannot be a trace
  CHECK_FALSE(check_datum(d, BoundaryDatum::affine(Vec2(1.5, 0)), K, 256, 500, 1, false).passed());
  const auto star = check_condition_star(d.sample(256), BoundaryDatum::affine(Vec2(0.3, 0)), K);
  CHECK(star.passed);
  CHECK(star.max_polar_gauge == doctest::Approx(0.3));
}

TEST_CASE("grid helpers") {
  const Domain2D d = Domain2D::disc(1);
  const Grid2D g = make_grid(d, 0.125, 3);
  // origin is a node
  bool found = false;
  for (int k = 0; k < g.size(); ++k) found |= g.node(k).norm() < 1e-14;
  CHECK(found);
  const auto dist = distance_field(g, d);
  for (int k = 0; k < g.size(); ++k) CHECK(dist[k] == doctest::Approx(1 - g.node(k).norm()).epsilon(1e-9));
  // bilinear interpolation is exact on bilinear functions
  std::vector<double> v(g.size());
  for (int k = 0; k < g.size(); ++k) v[k] = 1 + 2 * g.node(k).x() - g.node(k).y() + 0.5 * g.node(k).x() * g.node(k).y();
  const Vec2 x(0.31, -0.27);
  CHECK(interpolate(g, v, x) == doctest::Approx(1 + 2 * x.x() - x.y() + 0.5 * x.x() * x.y()).epsilon(1e-12));
  const auto mask = domain_mask(g, d);
  int interior = 0, band = 0;
  for (auto m : mask) {
    interior += m == kInterior;
    band += m == kBand;
  }
  CHECK(interior > 0);
  CHECK(band > 0);
}

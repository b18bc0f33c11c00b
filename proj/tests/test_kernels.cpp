#include "gradcon/kernels.hpp"

#include <doctest.h>

#include <cmath>

using namespace gradcon;

TEST_CASE("envelope: serial and parallel agree exactly") {
  const Domain2D d = Domain2D::ellipse(2, 1);
  const Grid2D g = make_grid(d, 1.0 / 16, 2);
  std::vector<Vec2> pts;
  std::vector<double> phi;
  for (const auto& s : d.sample(400)) {
    pts.push_back(s.point);
    phi.push_back(0.1 * s.point.x());
  }
  const ConvexBody K = ConvexBody::p_ball(3, 1);
  const EnvelopeOut a = envelope_serial(g, K, pts, phi, 1e-9), b = envelope_parallel(g, K, pts, phi, 1e-9);
  CHECK(a.value == b.value);
  CHECK(a.argmin == b.argmin);
  CHECK(a.clusters == b.clusters);
  // argmin attains the value
  for (int k = 0; k < g.size(); k += 11) {
    const int j = a.argmin[k];
    CHECK(a.value[k] == doctest::Approx(K.gauge(Vec2(g.node(k) - pts[j])) + phi[j]).epsilon(1e-14));
  }
}

TEST_CASE("bump stencil is a normalized symmetric kernel") {
  const ConvStencil s = bump_stencil(0.1, 0.02);
  double sum = 0, mx = 0, my = 0;
  for (std::size_t i = 0; i < s.w.size(); ++i) {
    CHECK(s.w[i] >= 0);
    sum += s.w[i];
    mx += s.w[i] * s.di[i];
    my += s.w[i] * s.dj[i];
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(mx) < 1e-12);
  CHECK(std::abs(my) < 1e-12);
}

TEST_CASE("convolution reproduces affine functions; serial equals parallel") {
  const Grid2D g = make_grid(Domain2D::disc(1), 1.0 / 32, 6);
  std::vector<double> f(g.size());
  for (int k = 0; k < g.size(); ++k) f[k] = 2 + g.node(k).x() - 3 * g.node(k).y();
  const ConvStencil s = bump_stencil(3.0 / 32, 1.0 / 32);
  const auto a = convolve_serial(g, f, s), b = convolve_parallel(g, f, s);
  int finite = 0;
  for (int k = 0; k < g.size(); ++k) {
    CHECK((a[k] == b[k] || (std::isnan(a[k]) && std::isnan(b[k]))));
    if (std::isfinite(a[k])) {
      ++finite;
      CHECK(a[k] == doctest::Approx(f[k]).epsilon(1e-12));
    }
  }
  CHECK(finite > g.size() / 2);
  // nodes whose kernel leaves the grid are NaN
  CHECK(std::isnan(a[0]));
}

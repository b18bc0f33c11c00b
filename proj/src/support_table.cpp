#include "gradcon/support_table.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gradcon {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double t) {
  t = std::fmod(t, kTwoPi);
  return t < 0 ? t + kTwoPi : t;
}

// eta(phi) = (1 + cos(pi phi / w))^2 / (3w) and its first two derivatives.
void kernel(double phi, double w, double out[3]) {
  const double a = std::numbers::pi / w;
  const double s = a * phi;
  const double c = std::cos(s), sn = std::sin(s);
  out[0] = (1 + c) * (1 + c) / (3 * w);
  out[1] = -2 * (1 + c) * sn * a / (3 * w);
  out[2] = (2 * sn * sn - 2 * c - 2 * c * c) * a * a / (3 * w);
}

}  // namespace

SupportTable SupportTable::mollified(const std::function<double(double)>& base,
                                     std::vector<double> kinks, double width, double offset,
                                     int nodes_per_width) {
  using Quad = boost::math::quadrature::gauss<double, 20>;
  SupportTable t;
  t.width_ = width;
  t.offset_ = offset;
  const int n = std::max(720, static_cast<int>(std::ceil(kTwoPi / width * nodes_per_width)));
  t.dtheta_ = kTwoPi / n;
  t.h_.resize(n);
  t.h1_.resize(n);
  t.h2_.resize(n);
  for (auto& k : kinks) k = wrap(k);
  std::sort(kinks.begin(), kinks.end());

  std::vector<double> cuts;
  for (int i = 0; i < n; ++i) {
    const double theta = i * t.dtheta_;
    // phi in [-w, w]; base is evaluated at theta - phi, so a kink at kappa
    // sits at phi = theta - kappa (mod 2pi).
    cuts.assign({-width, width});
    for (double kappa : kinks) {
      for (int m = -1; m <= 1; ++m) {
        const double phi = theta - kappa + m * kTwoPi;
        if (phi > -width && phi < width) cuts.push_back(phi);
      }
    }
    std::sort(cuts.begin(), cuts.end());
    double acc[3] = {0, 0, 0};
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double a = cuts[c], b = cuts[c + 1];
      if (b - a <= 0) continue;
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      const auto& x = Quad::abscissa();
      const auto& wts = Quad::weights();
      for (std::size_t q = 0; q < x.size(); ++q) {
        for (int sgn : {-1, 1}) {
          if (x[q] == 0 && sgn < 0) continue;
          const double phi = mid + sgn * half * x[q];
          double e[3];
          kernel(phi, width, e);
          const double hb = base(theta - phi);
          for (int d = 0; d < 3; ++d) acc[d] += wts[q] * half * e[d] * hb;
        }
      }
    }
    t.h_[i] = acc[0] + offset;
    t.h1_[i] = acc[1];
    t.h2_[i] = acc[2];
  }
  return t;
}

SupportTable::Value SupportTable::eval(double theta) const {
  const int n = static_cast<int>(h_.size());
  const double s = wrap(theta) / dtheta_;
  int i = static_cast<int>(s);
  double u = s - i;
  if (i >= n) {
    i = n - 1;
    u = 1.0;
  }
  const int j = (i + 1) % n;
  const double d = dtheta_;
  const double f0 = h_[i], g0 = h1_[i] * d, k0 = h2_[i] * d * d;
  const double f1 = h_[j], g1 = h1_[j] * d, k1 = h2_[j] * d * d;
  const double u2 = u * u, u3 = u2 * u, u4 = u3 * u, u5 = u4 * u;

  const double H0 = 1 - 10 * u3 + 15 * u4 - 6 * u5;
  const double H1 = u - 6 * u3 + 8 * u4 - 3 * u5;
  const double H2 = 0.5 * u2 - 1.5 * u3 + 1.5 * u4 - 0.5 * u5;
  const double H3 = 10 * u3 - 15 * u4 + 6 * u5;
  const double H4 = -4 * u3 + 7 * u4 - 3 * u5;
  const double H5 = 0.5 * u3 - u4 + 0.5 * u5;

  const double D0 = -30 * u2 + 60 * u3 - 30 * u4;
  const double D1 = 1 - 18 * u2 + 32 * u3 - 15 * u4;
  const double D2 = u - 4.5 * u2 + 6 * u3 - 2.5 * u4;
  const double D3 = -D0;
  const double D4 = -12 * u2 + 28 * u3 - 15 * u4;
  const double D5 = 1.5 * u2 - 4 * u3 + 2.5 * u4;

  const double S0 = -60 * u + 180 * u2 - 120 * u3;
  const double S1 = -36 * u + 96 * u2 - 60 * u3;
  const double S2 = 1 - 9 * u + 18 * u2 - 10 * u3;
  const double S3 = -S0;
  const double S4 = -24 * u + 84 * u2 - 60 * u3;
  const double S5 = 3 * u - 12 * u2 + 10 * u3;

  Value v;
  v.h = f0 * H0 + g0 * H1 + k0 * H2 + f1 * H3 + g1 * H4 + k1 * H5;
  v.h1 = (f0 * D0 + g0 * D1 + k0 * D2 + f1 * D3 + g1 * D4 + k1 * D5) / d;
  v.h2 = (f0 * S0 + g0 * S1 + k0 * S2 + f1 * S3 + g1 * S4 + k1 * S5) / (d * d);
  return v;
}

}  // namespace gradcon

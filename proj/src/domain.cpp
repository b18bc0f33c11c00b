#include "gradcon/domain.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace gradcon {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2 * kPi;
constexpr int kArcTable = 4096;
constexpr int kCoarse = 1024;

double wrap(double t) {
  t = std::fmod(t, kTwoPi);
  return t < 0 ? t + kTwoPi : t;
}

struct Piece {
  Vec2 p, dp, ddp;  // derivatives with respect to arclength
};

// Rounded rectangle by arclength s in [0, L), starting at the bottom of the right edge.
Piece rounded_rect_piece(double w, double h, double r, double s) {
  const double ev = h - 2 * r, eh = w - 2 * r, arc = 0.5 * kPi * r;
  const double W = 0.5 * w, H = 0.5 * h;
  const Vec2 dirs[4] = {{0, 1}, {-1, 0}, {0, -1}, {1, 0}};
  const Vec2 starts[4] = {{W, -H + r}, {W - r, H}, {-W, H - r}, {-W + r, -H}};
  const Vec2 centers[4] = {{W - r, H - r}, {-W + r, H - r}, {-W + r, -H + r}, {W - r, -H + r}};
  const double lens[4] = {ev, eh, ev, eh};
  for (int q = 0; q < 4; ++q) {
    if (s <= lens[q]) return {starts[q] + s * dirs[q], dirs[q], Vec2::Zero()};
    s -= lens[q];
    if (s <= arc || q == 3) {
      const double al = 0.5 * kPi * q + std::min(s, arc) / r;
      const Vec2 u(std::cos(al), std::sin(al));
      return {centers[q] + r * u, perp(u), -u / r};
    }
    s -= arc;
  }
  return {};
}

}  // namespace

Domain2D Domain2D::disc(double R) {
  require(R > 0, ErrorKind::invalid_argument, "disc radius must be positive");
  Domain2D d;
  d.kind_ = DomainKind::disc;
  d.a_ = d.b_ = R;
  d.finish();
  return d;
}

Domain2D Domain2D::ellipse(double a, double b) {
  require(a > 0 && b > 0, ErrorKind::invalid_argument, "ellipse semi-axes must be positive");
  Domain2D d;
  d.kind_ = DomainKind::ellipse;
  d.a_ = a;
  d.b_ = b;
  d.finish();
  return d;
}

Domain2D Domain2D::rounded_rectangle(double w, double h, double r) {
  require(w > 0 && h > 0 && r > 0 && 2 * r <= std::min(w, h), ErrorKind::invalid_argument,
          "rounded rectangle needs 0 < r <= min(w, h) / 2");
  Domain2D d;
  d.kind_ = DomainKind::rounded_rectangle;
  d.a_ = w;
  d.b_ = h;
  d.c_ = r;
  d.finish();
  return d;
}

Domain2D Domain2D::star(double r0, double amp, int m) {
  require(r0 > 0 && std::abs(amp) < 1 && m >= 1, ErrorKind::invalid_argument,
          "star needs r0 > 0, |amp| < 1, m >= 1");
  Domain2D d;
  d.kind_ = DomainKind::star;
  d.a_ = r0;
  d.b_ = amp;
  d.m_ = m;
  d.finish();
  return d;
}

void Domain2D::finish() {
  if (kind_ == DomainKind::disc) {
    perimeter_ = kTwoPi * a_;
  } else if (kind_ == DomainKind::rounded_rectangle) {
    perimeter_ = 2 * (a_ - 2 * c_) + 2 * (b_ - 2 * c_) + kTwoPi * c_;
  } else {
    using Quad = boost::math::quadrature::gauss<double, 10>;
    cum_.assign(kArcTable + 1, 0.0);
    const double dt = kTwoPi / kArcTable;
    for (int i = 0; i < kArcTable; ++i)
      cum_[i + 1] = cum_[i] + Quad::integrate([this](double t) { return speed(t); }, i * dt, (i + 1) * dt);
    perimeter_ = cum_.back();
  }
  bmin_ = Vec2::Constant(1e300);
  bmax_ = Vec2::Constant(-1e300);
  for (int i = 0; i < 4096; ++i) {
    const Vec2 p = point(kTwoPi * i / 4096);
    bmin_ = bmin_.cwiseMin(p);
    bmax_ = bmax_.cwiseMax(p);
  }
}

std::string Domain2D::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case DomainKind::disc: os << "disc(R=" << a_ << ")"; break;
    case DomainKind::ellipse: os << "ellipse(a=" << a_ << ", b=" << b_ << ")"; break;
    case DomainKind::rounded_rectangle: os << "rounded_rectangle(w=" << a_ << ", h=" << b_ << ", r=" << c_ << ")"; break;
    case DomainKind::star: os << "star(r0=" << a_ << ", amp=" << b_ << ", m=" << m_ << ")"; break;
  }
  return os.str();
}

Vec2 Domain2D::point(double t) const {
  switch (kind_) {
    case DomainKind::disc:
    case DomainKind::ellipse:
      return {a_ * std::cos(t), b_ * std::sin(t)};
    case DomainKind::rounded_rectangle:
      return rounded_rect_piece(a_, b_, c_, wrap(t) / kTwoPi * perimeter_).p;
    case DomainKind::star: {
      const double r = a_ * (1 + b_ * std::cos(m_ * t));
      return {r * std::cos(t), r * std::sin(t)};
    }
  }
  return {};
}

Vec2 Domain2D::d1(double t) const {
  switch (kind_) {
    case DomainKind::disc:
    case DomainKind::ellipse:
      return {-a_ * std::sin(t), b_ * std::cos(t)};
    case DomainKind::rounded_rectangle:
      return rounded_rect_piece(a_, b_, c_, wrap(t) / kTwoPi * perimeter_).dp * (perimeter_ / kTwoPi);
    case DomainKind::star: {
      const double r = a_ * (1 + b_ * std::cos(m_ * t));
      const double r1 = -a_ * b_ * m_ * std::sin(m_ * t);
      const Vec2 u(std::cos(t), std::sin(t));
      return r1 * u + r * perp(u);
    }
  }
  return {};
}

Vec2 Domain2D::d2(double t) const {
  switch (kind_) {
    case DomainKind::disc:
    case DomainKind::ellipse:
      return {-a_ * std::cos(t), -b_ * std::sin(t)};
    case DomainKind::rounded_rectangle: {
      const double sc = perimeter_ / kTwoPi;
      return rounded_rect_piece(a_, b_, c_, wrap(t) / kTwoPi * perimeter_).ddp * (sc * sc);
    }
    case DomainKind::star: {
      const double r = a_ * (1 + b_ * std::cos(m_ * t));
      const double r1 = -a_ * b_ * m_ * std::sin(m_ * t);
      const double r2 = -a_ * b_ * m_ * m_ * std::cos(m_ * t);
      const Vec2 u(std::cos(t), std::sin(t));
      return (r2 - r) * u + 2 * r1 * perp(u);
    }
  }
  return {};
}

BoundarySample Domain2D::at(double t) const {
  BoundarySample s;
  s.param = wrap(t);
  s.point = point(s.param);
  const Vec2 p1 = d1(s.param), p2 = d2(s.param);
  const double sp = p1.norm();
  s.tangent = p1 / sp;
  s.normal = perp(s.tangent);
  s.curvature = (p1.x() * p2.y() - p1.y() * p2.x()) / (sp * sp * sp);
  s.arclength = arclength(s.param);
  return s;
}

bool Domain2D::contains(const Vec2& x) const {
  switch (kind_) {
    case DomainKind::disc:
      return x.squaredNorm() < a_ * a_;
    case DomainKind::ellipse:
      return (x.x() / a_) * (x.x() / a_) + (x.y() / b_) * (x.y() / b_) < 1.0;
    case DomainKind::rounded_rectangle: {
      const double W = 0.5 * a_, H = 0.5 * b_, r = c_;
      const double ax = std::abs(x.x()), ay = std::abs(x.y());
      if (ax >= W || ay >= H) return false;
      if (ax > W - r && ay > H - r) return Vec2(ax - (W - r), ay - (H - r)).squaredNorm() < r * r;
      return true;
    }
    case DomainKind::star: {
      const double t = std::atan2(x.y(), x.x());
      return x.norm() < a_ * (1 + b_ * std::cos(m_ * t));
    }
  }
  return false;
}

double Domain2D::arclength(double t) const {
  t = wrap(t);
  if (kind_ == DomainKind::disc) return a_ * t;
  if (kind_ == DomainKind::rounded_rectangle) return t / kTwoPi * perimeter_;
  using Quad = boost::math::quadrature::gauss<double, 10>;
  const double dt = kTwoPi / kArcTable;
  const int i = std::min(kArcTable - 1, static_cast<int>(t / dt));
  return cum_[i] + Quad::integrate([this](double s) { return speed(s); }, i * dt, t);
}

double Domain2D::param_at_arclength(double s) const {
  s = std::fmod(s, perimeter_);
  if (s < 0) s += perimeter_;
  if (kind_ == DomainKind::disc || kind_ == DomainKind::rounded_rectangle) return s / perimeter_ * kTwoPi;
  const auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
  const int i = std::clamp(static_cast<int>(it - cum_.begin()) - 1, 0, kArcTable - 1);
  const double dt = kTwoPi / kArcTable;
  double lo = i * dt, hi = (i + 1) * dt;
  double t = lo + (s - cum_[i]) / (cum_[i + 1] - cum_[i]) * dt;
  for (int k = 0; k < 20; ++k) {
    const double f = arclength(t) - s;
    if (std::abs(f) < 1e-14 * perimeter_) break;
    if (f > 0) hi = t; else lo = t;
    double tn = t - f / speed(t);
    if (tn <= lo || tn >= hi) tn = 0.5 * (lo + hi);
    t = tn;
  }
  return t;
}

std::vector<BoundarySample> Domain2D::sample(int n) const {
  require(n >= 3, ErrorKind::invalid_argument, "need at least 3 boundary samples");
  std::vector<BoundarySample> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(at(param_at_arclength(perimeter_ * i / n)));
  return out;
}

int Domain2D::recommended_samples(double h) const {
  int n = std::max(512, static_cast<int>(std::ceil(perimeter_ / h)));
  return (n + 3) / 4 * 4;
}

DistanceResult Domain2D::project(const Vec2& x) const {
  DistanceResult res;
  if (kind_ == DomainKind::disc) {
    const double r = x.norm();
    const Vec2 u = r > 0 ? Vec2(x / r) : Vec2(1, 0);
    res.foot = a_ * u;
    res.d = std::abs(a_ - r);
    res.param = wrap(std::atan2(u.y(), u.x()));
    return res;
  }
  std::vector<double> f(kCoarse);
  const double dt = kTwoPi / kCoarse;
  for (int j = 0; j < kCoarse; ++j) f[j] = (point(j * dt) - x).squaredNorm();
  std::vector<int> minima;
  for (int j = 0; j < kCoarse; ++j)
    if (f[j] <= f[(j + kCoarse - 1) % kCoarse] && f[j] <= f[(j + 1) % kCoarse]) minima.push_back(j);
  std::sort(minima.begin(), minima.end(), [&](int a, int b) { return f[a] < f[b]; });
  if (minima.size() > 3) minima.resize(3);
  double best = 1e300;
  for (int j : minima) {
    auto obj = [&](double t) { return (point(t) - x).squaredNorm(); };
    const auto r = boost::math::tools::brent_find_minima(obj, (j - 1) * dt, (j + 1) * dt, 52);
    if (r.second < best) {
      best = r.second;
      res.param = wrap(r.first);
    }
  }
  res.foot = point(res.param);
  res.d = (res.foot - x).norm();
  return res;
}

DistanceResult Domain2D::euclidean_distance(const Vec2& x) const {
  const DistanceResult r = project(x);
  require(contains(x) || r.d <= 1e-9, ErrorKind::domain, "point lies outside the closure of U");
  return r;
}

double Domain2D::signed_distance(const Vec2& x) const {
  const double d = project(x).d;
  return contains(x) ? d : -d;
}

Mat2 Domain2D::boundary_hessian_of_distance(const Vec2& y) const {
  const DistanceResult r = project(y);
  require(r.d <= 1e-7, ErrorKind::domain, "point is not on the boundary");
  const BoundarySample s = at(r.param);
  return -s.curvature * s.tangent * s.tangent.transpose();
}

std::string BoundaryDatum::describe() const {
  std::ostringstream os;
  switch (kind) {
    case DatumKind::zero: os << "zero"; break;
    case DatumKind::affine: os << "affine(c=[" << c.x() << "," << c.y() << "], c0=" << c0 << ")"; break;
    case DatumKind::quadratic:
      os << "quadratic(Q=[[" << Q(0, 0) << "," << Q(0, 1) << "],[" << Q(1, 0) << "," << Q(1, 1) << "]], c=["
         << c.x() << "," << c.y() << "], c0=" << c0 << ")";
      break;
  }
  return os.str();
}

Report check_datum(const Domain2D& dom, const BoundaryDatum& phi, const ConvexBody& K, int n_samples,
                   int n_pairs, unsigned seed, bool require_strict) {
  Report rep;
  rep.title = "boundary datum";
  const auto s = dom.sample(n_samples);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, n_samples - 1);
  double worst = 0;
  for (int k = 0; k < n_pairs; ++k) {
    const Vec2 x = s[pick(rng)].point, y = s[pick(rng)].point;
    const double diff = phi.value(x) - phi.value(y);
    worst = std::max(worst, std::max(-K.gauge(Vec2(y - x)) - diff, diff - K.gauge(Vec2(x - y))));
  }
  rep.add("lipschitz_compatibility", worst <= 1e-12, worst, 1e-12);
  const ConvexBody pol = K.polar();
  double gmax = 0;
  for (const auto& b : s) gmax = std::max(gmax, pol.gauge(phi.gradient(b.point)));
  rep.add(require_strict ? "strict_constraint_qualification" : "constraint_qualification",
          require_strict ? gmax < 1.0 : gmax <= 1.0 + 1e-9, gmax, 1.0);
  return rep;
}

ConditionStarReport check_condition_star(const std::vector<BoundarySample>& samples, const BoundaryDatum& phi,
                                         const ConvexBody& K, double tol) {
  ConditionStarReport out;
  out.report.title = "condition star";
  const ConvexBody pol = K.polar();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Vec2 g = phi.gradient(samples[i].point);
    const double v = pol.gauge(g);
    out.max_polar_gauge = std::max(out.max_polar_gauge, v);
    require(v <= 1.0 + tol, ErrorKind::infeasible_datum, "gradient of phi leaves the constraint set");
    if (std::abs(v - 1.0) > tol) continue;
    out.saturated.push_back(static_cast<int>(i));
    const GaugeEval ev = pol.derivatives(VecX(g));
    std::vector<VecX> gens;
    if (ev.has_gradient) gens.push_back(ev.gradient.normalized());
    for (const auto& e : ev.subdifferential_extremes) gens.push_back(e.normalized());
    bool ok = true;
    for (const auto& gv : gens) ok &= std::abs(Vec2(gv[0], gv[1]).dot(samples[i].normal)) > tol;
    if (!ok) out.failing.push_back(static_cast<int>(i));
  }
  out.passed = out.failing.empty();
  out.report.add("transversality", out.passed, static_cast<double>(out.failing.size()), 0,
                 std::to_string(out.saturated.size()) + " saturated samples");
  return out;
}

}  // namespace gradcon

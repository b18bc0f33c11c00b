#include "gradcon/convex_body.hpp"

#include "gradcon/support_table.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace gradcon {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::domain: return "domain-error";
    case ErrorKind::infeasible_datum: return "infeasible-datum";
    case ErrorKind::degenerate_transversality: return "degenerate-transversality";
    case ErrorKind::ridge_proximity: return "ridge-proximity";
    case ErrorKind::nondifferentiable: return "nondifferentiable";
    case ErrorKind::nonconvergence: return "nonconvergence";
    case ErrorKind::invalid_state: return "invalid-state";
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::invalid_obstacles: return "invalid-obstacles";
    case ErrorKind::validation: return "validation";
  }
  return "error";
}

std::string Report::to_text() const {
  std::ostringstream os;
  os.precision(6);
  os << "report: " << title << "\n";
  os << "status: " << (passed() ? "PASS" : "FAIL") << "\n";
  for (const auto& l : lines) {
    os << l.name << ": " << (l.passed ? "PASS" : "FAIL") << " measured=" << l.measured
       << " tol=" << l.tolerance;
    if (!l.detail.empty()) os << " (" << l.detail << ")";
    os << "\n";
  }
  return os.str();
}

const char* to_string(BodyKind k) {
  switch (k) {
    case BodyKind::ball: return "ball";
    case BodyKind::ellipse: return "ellipse";
    case BodyKind::polygon: return "polygon";
    case BodyKind::p_ball: return "p_ball";
    case BodyKind::smoothed: return "smoothed";
  }
  return "?";
}

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kBoundaryTol = 1e-9;
// Base mollifier half-width; level k uses kWidth0 / k^2.
constexpr double kWidth0 = 0.25;

double sgn(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

struct SupportPoint {
  Vec2 p, dp, ddp;  // p(theta) = u / h and its derivatives
};

SupportPoint support_point(const SupportTable& t, double th) {
  const auto v = t.eval(th);
  const Vec2 u(std::cos(th), std::sin(th));
  const Vec2 w = perp(u);
  const double h = v.h, h1 = v.h1, h2 = v.h2;
  SupportPoint s;
  s.p = u / h;
  s.dp = w / h - u * h1 / (h * h);
  s.ddp = -u / h - 2 * w * h1 / (h * h) - u * h2 / (h * h) + 2 * u * h1 * h1 / (h * h * h);
  return s;
}

}  // namespace

ConvexBody ConvexBody::ball(double r, int dim) {
  require(r > 0 && std::isfinite(r), ErrorKind::invalid_argument, "ball radius must be positive");
  require(dim >= 2, ErrorKind::invalid_argument, "dimension must be >= 2");
  ConvexBody b;
  b.kind_ = BodyKind::ball;
  b.dim_ = dim;
  b.r_ = r;
  return b;
}

ConvexBody ConvexBody::ellipse(std::vector<double> semi_axes) {
  require(semi_axes.size() >= 2, ErrorKind::invalid_argument, "ellipse needs >= 2 semi-axes");
  for (double a : semi_axes)
    require(a > 0 && std::isfinite(a), ErrorKind::invalid_argument, "semi-axes must be positive");
  ConvexBody b;
  b.kind_ = BodyKind::ellipse;
  b.dim_ = static_cast<int>(semi_axes.size());
  b.axes_ = std::move(semi_axes);
  return b;
}

ConvexBody ConvexBody::polygon(std::vector<Vec2> v) {
  const int n = static_cast<int>(v.size());
  require(n >= 3, ErrorKind::invalid_argument, "polygon needs >= 3 vertices");
  ConvexBody b;
  b.kind_ = BodyKind::polygon;
  b.dim_ = 2;
  for (int i = 0; i < n; ++i) {
    const Vec2 e0 = v[(i + 1) % n] - v[i];
    const Vec2 e1 = v[(i + 2) % n] - v[(i + 1) % n];
    const double cross = e0.x() * e1.y() - e0.y() * e1.x();
    require(cross > 0, ErrorKind::invalid_argument,
            "polygon vertices must be in strictly convex counterclockwise position");
    const Vec2 nrm = Vec2(e0.y(), -e0.x()).normalized();
    const double off = nrm.dot(v[i]);
    require(off > 0, ErrorKind::invalid_argument, "origin not interior");
    b.normals_.push_back(nrm);
    b.offsets_.push_back(off);
  }
  // Total turning must be one full turn (rules out self-overlapping stars).
  double turn = 0;
  for (int i = 0; i < n; ++i) {
    const double a0 = std::atan2(b.normals_[i].y(), b.normals_[i].x());
    const double a1 = std::atan2(b.normals_[(i + 1) % n].y(), b.normals_[(i + 1) % n].x());
    double d = a1 - a0;
    while (d <= 0) d += 2 * kPi;
    turn += d;
  }
  require(std::abs(turn - 2 * kPi) < 1e-9, ErrorKind::invalid_argument,
          "polygon vertices are not in convex position");
  b.vertices_ = std::move(v);
  return b;
}

ConvexBody ConvexBody::p_ball(double p, double scale, int dim) {
  require(p > 1 && std::isfinite(p), ErrorKind::invalid_argument, "p_ball exponent must be in (1, inf)");
  require(scale > 0, ErrorKind::invalid_argument, "p_ball scale must be positive");
  require(dim >= 2, ErrorKind::invalid_argument, "dimension must be >= 2");
  ConvexBody b;
  b.kind_ = BodyKind::p_ball;
  b.dim_ = dim;
  b.p_ = p;
  b.scale_ = scale;
  return b;
}

double ConvexBody::smoothed_support_gauge(double x, double y, double* theta_star) const {
  const double r = std::hypot(x, y);
  if (r == 0) {
    if (theta_star) *theta_star = 0;
    return 0;
  }
  const double psi = std::atan2(y, x);
  const Vec2 yv(x, y);
  const SupportTable& t = *table_;
  auto neg_g = [&](double th) { return -yv.dot(Vec2(std::cos(th), std::sin(th))) / t.eval(th).h; };
  // <y, p(theta)> along the convex curve p = u/h is unimodal on the half circle facing y.
  auto res = boost::math::tools::brent_find_minima(neg_g, psi - 0.5 * kPi, psi + 0.5 * kPi, 50);
  double th = res.first;
  for (int it = 0; it < 3; ++it) {
    const SupportPoint s = support_point(t, th);
    const double g1 = yv.dot(s.dp), g2 = yv.dot(s.ddp);
    if (g2 >= 0) break;
    const double step = -g1 / g2;
    if (std::abs(step) > 1e-3) break;
    th += step;
    if (std::abs(step) < 1e-15) break;
  }
  if (theta_star) *theta_star = th;
  return yv.dot(support_point(t, th).p);
}

double ConvexBody::gauge2(double x, double y) const {
  if (mirrored_) {
    x = -x;
    y = -y;
  }
  switch (kind_) {
    case BodyKind::ball:
      return std::hypot(x, y) / r_;
    case BodyKind::ellipse:
      return std::hypot(x / axes_[0], y / axes_[1]);
    case BodyKind::p_ball: {
      const double ax = std::abs(x), ay = std::abs(y);
      const double m = std::max(ax, ay);
      if (m == 0) return 0;
      return m * std::pow(std::pow(ax / m, p_) + std::pow(ay / m, p_), 1.0 / p_) / scale_;
    }
    case BodyKind::polygon: {
      double g = 0;
      for (std::size_t f = 0; f < normals_.size(); ++f)
        g = std::max(g, (normals_[f].x() * x + normals_[f].y() * y) / offsets_[f]);
      return g;
    }
    case BodyKind::smoothed: {
      if (dual_) {
        const double r = std::hypot(x, y);
        if (r == 0) return 0;
        return r * table_->eval(std::atan2(y, x)).h;
      }
      return smoothed_support_gauge(x, y, nullptr);
    }
  }
  return 0;
}

double ConvexBody::gauge(std::span<const double> x) const {
  require(static_cast<int>(x.size()) == dim_, ErrorKind::invalid_argument, "dimension mismatch");
  if (dim_ == 2) return gauge2(x[0], x[1]);
  // Only the n-dimensional kinds reach here; all are centrally symmetric.
  switch (kind_) {
    case BodyKind::ball: {
      double s = 0;
      for (double v : x) s += v * v;
      return std::sqrt(s) / r_;
    }
    case BodyKind::ellipse: {
      double s = 0;
      for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] / axes_[i]) * (x[i] / axes_[i]);
      return std::sqrt(s);
    }
    case BodyKind::p_ball: {
      double m = 0;
      for (double v : x) m = std::max(m, std::abs(v));
      if (m == 0) return 0;
      double s = 0;
      for (double v : x) s += std::pow(std::abs(v) / m, p_);
      return m * std::pow(s, 1.0 / p_) / scale_;
    }
    default:
      break;
  }
  throw Error(ErrorKind::invalid_argument, "dimension mismatch");
}

GaugeEval ConvexBody::derivatives(const VecX& xin) const {
  require(xin.size() == dim_, ErrorKind::invalid_argument, "dimension mismatch");
  require(xin.norm() > 0, ErrorKind::domain, "gauge derivatives undefined at x = 0");
  const int n = dim_;
  const VecX x = mirrored_ ? VecX(-xin) : xin;
  GaugeEval ev;
  ev.value = gauge(x);
  if (mirrored_) ev.value = gauge(xin);
  ev.gradient = VecX::Zero(n);
  ev.hessian = MatX::Zero(n, n);

  switch (kind_) {
    case BodyKind::ball: {
      const double nx = x.norm();
      ev.gradient = x / (nx * r_);
      ev.hessian = (MatX::Identity(n, n) - x * x.transpose() / (nx * nx)) / (nx * r_);
      ev.has_gradient = ev.has_hessian = true;
      break;
    }
    case BodyKind::ellipse: {
      VecX dinv(n);
      for (int i = 0; i < n; ++i) dinv[i] = 1.0 / (axes_[i] * axes_[i]);
      const double g = std::sqrt(x.dot(dinv.cwiseProduct(x)));
      ev.gradient = dinv.cwiseProduct(x) / g;
      ev.hessian = MatX(dinv.asDiagonal()) / g - ev.gradient * ev.gradient.transpose() / g;
      ev.has_gradient = ev.has_hessian = true;
      break;
    }
    case BodyKind::p_ball: {
      double m = x.cwiseAbs().maxCoeff();
      VecX xs = x / m;  // scaled to avoid overflow; gradient is 0-homogeneous
      double N = 0;
      for (int i = 0; i < n; ++i) N += std::pow(std::abs(xs[i]), p_);
      N = std::pow(N, 1.0 / p_);
      VecX v(n);
      for (int i = 0; i < n; ++i) v[i] = sgn(xs[i]) * std::pow(std::abs(xs[i]), p_ - 1);
      ev.gradient = v * std::pow(N, 1 - p_) / scale_;
      ev.has_gradient = true;
      bool singular = false;
      if (p_ < 2)
        for (int i = 0; i < n; ++i) singular |= (xs[i] == 0);
      if (!singular) {
        VecX d(n);
        for (int i = 0; i < n; ++i) d[i] = std::pow(std::abs(xs[i]), p_ - 2);
        MatX H = MatX(d.asDiagonal()) * std::pow(N, 1 - p_) - v * v.transpose() * std::pow(N, 1 - 2 * p_);
        ev.hessian = (p_ - 1) / scale_ * H / m;
        ev.has_hessian = true;
      }
      break;
    }
    case BodyKind::polygon: {
      const double g = ev.value;
      std::vector<int> active;
      for (std::size_t f = 0; f < normals_.size(); ++f) {
        const double val = normals_[f].dot(Vec2(x[0], x[1])) / offsets_[f];
        if (val >= g - 1e-12 * std::max(1.0, g)) active.push_back(static_cast<int>(f));
      }
      if (active.size() == 1) {
        ev.gradient = VecX(normals_[active[0]] / offsets_[active[0]]);
        ev.has_gradient = true;
        ev.has_hessian = true;  // locally linear
      } else {
        for (int f : active) {
          VecX s = normals_[f] / offsets_[f];
          ev.subdifferential_extremes.push_back(mirrored_ ? VecX(-s) : s);
        }
      }
      break;
    }
    case BodyKind::smoothed: {
      const Vec2 y(x[0], x[1]);
      if (dual_) {
        const double r = y.norm(), th = std::atan2(y.y(), y.x());
        const auto v = table_->eval(th);
        const Vec2 u(std::cos(th), std::sin(th)), w = perp(u);
        ev.gradient = VecX(v.h * u + v.h1 * w);
        ev.hessian = MatX((v.h + v.h2) / r * w * w.transpose());
      } else {
        double th = 0;
        smoothed_support_gauge(y.x(), y.y(), &th);
        const SupportPoint s = support_point(*table_, th);
        ev.gradient = VecX(s.p);
        ev.hessian = MatX(-s.dp * s.dp.transpose() / y.dot(s.ddp));
      }
      ev.has_gradient = ev.has_hessian = true;
      break;
    }
  }
  if (mirrored_) ev.gradient = -ev.gradient;
  return ev;
}

Vec2 ConvexBody::gradient2(const Vec2& x) const {
  GaugeEval ev = derivatives(VecX(x));
  require(ev.has_gradient, ErrorKind::nondifferentiable, "gauge not differentiable at this direction");
  return Vec2(ev.gradient[0], ev.gradient[1]);
}

Mat2 ConvexBody::hessian2(const Vec2& x) const {
  require(is_smooth(), ErrorKind::nondifferentiable, "hessian requested on a polygonal gauge");
  GaugeEval ev = derivatives(VecX(x));
  require(ev.has_hessian, ErrorKind::nondifferentiable, "gauge hessian is singular at this direction");
  return Mat2(ev.hessian);
}

ConvexBody ConvexBody::polar() const {
  ConvexBody b = *this;
  switch (kind_) {
    case BodyKind::ball:
      b.r_ = 1.0 / r_;
      break;
    case BodyKind::ellipse:
      for (auto& a : b.axes_) a = 1.0 / a;
      break;
    case BodyKind::p_ball:
      b.p_ = p_ / (p_ - 1);
      b.scale_ = 1.0 / scale_;
      break;
    case BodyKind::polygon: {
      std::vector<Vec2> pv;
      for (std::size_t f = 0; f < normals_.size(); ++f) pv.push_back(normals_[f] / offsets_[f]);
      return polygon(std::move(pv));
    }
    case BodyKind::smoothed:
      b.dual_ = !dual_;
      break;
  }
  return b;
}

ConvexBody ConvexBody::negated() const {
  if (kind_ == BodyKind::polygon) {
    std::vector<Vec2> nv;
    for (const auto& v : vertices_) nv.push_back(-v);
    return polygon(std::move(nv));
  }
  ConvexBody b = *this;
  if (kind_ == BodyKind::smoothed) b.mirrored_ = !mirrored_;
  return b;
}

ConvexBody ConvexBody::smooth_approximation(int k) const {
  require(k >= 1, ErrorKind::invalid_argument, "approximation level must be >= 1");
  const double grow = 1.0 + 1.0 / k;
  switch (kind_) {
    case BodyKind::ball:
      return ball(r_ * grow, dim_);
    case BodyKind::ellipse: {
      auto a = axes_;
      for (auto& v : a) v *= grow;
      return ellipse(a);
    }
    case BodyKind::smoothed:
      throw Error(ErrorKind::invalid_argument, "body is already a smoothed approximation");
    default:
      break;
  }
  require(dim_ == 2, ErrorKind::invalid_argument, "smooth approximation of this kind is 2D only");
  const ConvexBody pol = polar();
  std::vector<double> kinks;
  if (kind_ == BodyKind::polygon)
    for (const auto& nrm : normals_) kinks.push_back(std::atan2(nrm.y(), nrm.x()));
  const double R = max_radius();
  const double w = kWidth0 / (double(k) * k);
  // h_k >= h + A/k, and the strict nesting margin A/k - A/(k+1) beats the
  // mollification error R w_{k+1} + R w_{k+1}^2 / 2 because A exceeds R(w0 + w0^2).
  const double A = 2.0 * R * (kWidth0 + kWidth0 * kWidth0);
  const double offset = 0.5 * R * w * w + A / k;
  auto base = [&pol](double th) { return pol.gauge2(std::cos(th), std::sin(th)); };
  ConvexBody b;
  b.kind_ = BodyKind::smoothed;
  b.dim_ = 2;
  b.level_ = k;
  b.dual_ = false;
  b.table_ = std::make_shared<const SupportTable>(SupportTable::mollified(base, kinks, w, offset));
  return b;
}

double ConvexBody::support_curvature_radius(double theta) const {
  require(kind_ == BodyKind::smoothed, ErrorKind::invalid_argument, "only for smoothed bodies");
  const auto v = table_->eval(theta);
  return v.h + v.h2;
}

NormalCone ConvexBody::normal_cone(const VecX& x) const {
  const double g = gauge(x);
  require(std::abs(g - 1.0) <= kBoundaryTol, ErrorKind::domain, "point is not on the body boundary");
  NormalCone nc;
  nc.base_point = x;
  GaugeEval ev = derivatives(x);
  if (ev.has_gradient) {
    nc.generators.push_back(ev.gradient.normalized());
  } else {
    for (const auto& s : ev.subdifferential_extremes) nc.generators.push_back(s.normalized());
  }
  return nc;
}

double ConvexBody::max_radius() const {
  switch (kind_) {
    case BodyKind::ball: return r_;
    case BodyKind::ellipse: return *std::max_element(axes_.begin(), axes_.end());
    case BodyKind::p_ball: return scale_ * std::max(1.0, std::pow(double(dim_), 0.5 - 1.0 / p_));
    case BodyKind::polygon: {
      double m = 0;
      for (const auto& v : vertices_) m = std::max(m, v.norm());
      return m;
    }
    case BodyKind::smoothed: {
      double lo = 1e300, hi = 0;
      for (int i = 0; i < 4096; ++i) {
        const double h = table_->eval(2 * kPi * i / 4096).h;
        lo = std::min(lo, h);
        hi = std::max(hi, h);
      }
      return dual_ ? 1.0 / lo : hi;
    }
  }
  return 0;
}

double ConvexBody::inner_radius() const {
  switch (kind_) {
    case BodyKind::ball: return r_;
    case BodyKind::ellipse: return *std::min_element(axes_.begin(), axes_.end());
    case BodyKind::p_ball: return scale_ * std::min(1.0, std::pow(double(dim_), 0.5 - 1.0 / p_));
    case BodyKind::polygon: return *std::min_element(offsets_.begin(), offsets_.end());
    case BodyKind::smoothed: {
      double lo = 1e300, hi = 0;
      for (int i = 0; i < 4096; ++i) {
        const double h = table_->eval(2 * kPi * i / 4096).h;
        lo = std::min(lo, h);
        hi = std::max(hi, h);
      }
      return dual_ ? 1.0 / hi : lo;
    }
  }
  return 0;
}

std::vector<Vec2> ConvexBody::boundary_samples(int n) const {
  require(dim_ == 2, ErrorKind::invalid_argument, "boundary sampling is 2D only");
  std::vector<Vec2> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double th = 2 * kPi * i / n;
    const Vec2 u(std::cos(th), std::sin(th));
    out.push_back(u / gauge(u));
  }
  return out;
}

CauchySchwarz cauchy_schwarz_check(const ConvexBody& body, const VecX& x, const VecX& y) {
  require(x.norm() > 0, ErrorKind::domain, "x must be nonzero");
  const ConvexBody pol = body.polar();
  CauchySchwarz cs;
  cs.lhs = x.dot(y);
  cs.rhs = body.gauge(x) * pol.gauge(y);
  if (y.norm() == 0) {
    cs.witness_direction = x;
  } else {
    GaugeEval ev = pol.derivatives(y);
    cs.witness_direction = ev.has_gradient ? ev.gradient : ev.subdifferential_extremes.front();
  }
  return cs;
}

}  // namespace gradcon

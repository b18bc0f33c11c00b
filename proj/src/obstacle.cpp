#include "gradcon/obstacle.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace gradcon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2 * std::numbers::pi;

// Smallest positive root of det(I - tW) = 1 - t tr W + t^2 det W.
double first_caustic(const Mat2& W) {
  const double a = W.determinant(), b = -W.trace(), c = 1.0;
  double best = kInf;
  if (std::abs(a) < 1e-14 * (1 + std::abs(b))) {
    if (b < 0) best = -c / b;
    return best;
  }
  const double disc = b * b - 4 * a * c;
  if (disc < 0) return kInf;
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + (b >= 0 ? sq : -sq));
  for (double r : {q / a, c / q})
    if (r > 0 && std::isfinite(r)) best = std::min(best, r);
  return best;
}

struct Refined {
  double value, param;
};

// Brent refinement of t -> gamma(x - P(t)) + phi(P(t)) between the
// neighbours of sample j.
Refined refine_at(const ObstacleField& f, const Vec2& x, int j) {
  const int n = static_cast<int>(f.samples.size());
  double t0 = f.samples[(j + n - 1) % n].param, t1 = f.samples[j].param, t2 = f.samples[(j + 1) % n].param;
  if (t0 > t1) t0 -= kTwoPi;
  if (t2 < t1) t2 += kTwoPi;
  auto obj = [&](double t) {
    const Vec2 y = f.domain.point(t);
    return f.K.gauge2(x.x() - y.x(), x.y() - y.y()) + f.phi.value(y);
  };
  const auto r = boost::math::tools::brent_find_minima(obj, t0, t2, 52);
  const double sample_val = f.K.gauge2(x.x() - f.samples[j].point.x(), x.y() - f.samples[j].point.y()) +
                            f.phi_samples[j];
  if (r.second < sample_val) {
    double p = std::fmod(r.first, kTwoPi);
    if (p < 0) p += kTwoPi;
    return {r.second, p};
  }
  return {sample_val, f.samples[j].param};
}

}  // namespace

LambdaMu lambda_mu(const ConvexBody& Kpolar, const BoundaryDatum& phi, const BoundarySample& y) {
  const Vec2 g = phi.gradient(y.point);
  const Vec2 nu = y.normal;
  auto G = [&](double lam) { return Kpolar.gauge(Vec2(g + lam * nu)) - 1.0; };
  const double g0 = G(0.0);
  require(g0 < 0, ErrorKind::infeasible_datum, "no root with lambda > 0: gamma°(Dphi) >= 1 at a boundary point");
  LambdaMu out;
  double hi = 2.0 * std::max(Kpolar.max_radius(), 1.0) * (1.0 + g.norm());
  for (int it = 0; it < 60 && G(hi) <= 0; ++it) hi *= 2;
  require(G(hi) > 0, ErrorKind::infeasible_datum, "lambda bracket expansion failed");
  boost::uintmax_t iters = 200;
  const auto br = boost::math::tools::toms748_solve(G, 0.0, hi, g0, G(hi),
                                                   boost::math::tools::eps_tolerance<double>(52), iters);
  out.lambda = 0.5 * (br.first + br.second);
  out.mu = g + out.lambda * nu;
  return out;
}

BoundaryJet boundary_jet(const ConvexBody& Kpolar, const BoundaryDatum& phi, const BoundarySample& y) {
  BoundaryJet j;
  const LambdaMu lm = lambda_mu(Kpolar, phi, y);
  j.lambda = lm.lambda;
  j.mu = lm.mu;
  j.a = Kpolar.gradient2(j.mu);
  j.G = Kpolar.hessian2(j.mu);
  const double an = j.a.dot(y.normal);
  require(an > 1e-12 * j.a.norm(), ErrorKind::degenerate_transversality,
          "characteristic direction tangent to the boundary");
  const Mat2 X = j.a * y.normal.transpose() / an;
  const Mat2 I = Mat2::Identity();
  const Mat2 D2d = -y.curvature * y.tangent * y.tangent.transpose();
  j.d2rho = (I - X.transpose()) * (phi.hessian(y.point) + j.lambda * D2d) * (I - X);
  j.d2rho = 0.5 * (j.d2rho + j.d2rho.transpose());
  j.W = -j.G * j.d2rho;
  j.caustic_depth = first_caustic(j.W);
  j.valid = true;
  return j;
}

Mat2 d2rho_at_boundary(const ConvexBody& Kpolar, const BoundaryDatum& phi, const BoundarySample& y) {
  return boundary_jet(Kpolar, phi, y).d2rho;
}

ClosestPointResult ObstacleField::closest_points(const Vec2& x) const {
  const int n = static_cast<int>(samples.size());
  require(n > 0, ErrorKind::invalid_state, "empty boundary sampling");
  std::vector<double> fv(n);
  double best = kInf;
  int arg = 0;
  for (int j = 0; j < n; ++j) {
    fv[j] = K.gauge2(x.x() - samples[j].point.x(), x.y() - samples[j].point.y()) + phi_samples[j];
    if (fv[j] < best) {
      best = fv[j];
      arg = j;
    }
  }
  ClosestPointResult r;
  int starts = 0, inside = 0;
  for (int j = 0; j < n; ++j) {
    const bool in = fv[j] <= best + tie;
    if (in) r.minimizers.push_back(j);
    inside += in;
    if (in && !(fv[(j + n - 1) % n] <= best + tie)) ++starts;
  }
  r.is_multiple = inside == n || starts >= 2;
  const Refined rf = refine_at(*this, x, arg);
  r.value = rf.value;
  r.param = rf.param;
  return r;
}

double ObstacleField::envelope_at(const Vec2& x) const { return closest_points(x).value; }

ObstacleField build_obstacle(const Domain2D& dom, const ConvexBody& K, const BoundaryDatum& phi, const Grid2D& grid,
                             ObstacleSide side, const ObstacleOptions& opt) {
  require(K.dim() == 2, ErrorKind::invalid_argument, "obstacles are two-dimensional");
  ObstacleField f;
  f.side = side;
  f.grid = grid;
  f.domain = dom;
  f.K = side == ObstacleSide::upper ? K : K.negated();
  f.Kpolar = f.K.polar();
  f.phi = side == ObstacleSide::upper ? phi : phi.negated();
  const int n = opt.n_boundary > 0 ? opt.n_boundary : dom.recommended_samples(grid.h);
  f.samples = dom.sample(n);
  require(!f.samples.empty(), ErrorKind::invalid_state, "empty boundary sampling");
  std::vector<Vec2> pts(n);
  f.phi_samples.resize(n);
  for (int j = 0; j < n; ++j) {
    pts[j] = f.samples[j].point;
    f.phi_samples[j] = f.phi.value(pts[j]);
    f.spacing = std::max(f.spacing, (f.samples[(j + 1) % n].point - pts[j]).norm());
  }
  f.tie = 1e-9 + f.spacing * f.spacing;

  EnvelopeOut env = envelope(grid, f.K, pts, f.phi_samples, f.tie, opt.exec);
  const int N = grid.size();
  f.envelope = std::move(env.value);
  f.closest = std::move(env.argmin);
  f.multiple.assign(N, 0);
  for (int k = 0; k < N; ++k) f.multiple[k] = env.clusters[k] != 1;
  f.closest_param.resize(N);
  for (int k = 0; k < N; ++k) f.closest_param[k] = f.samples[f.closest[k]].param;

  if (opt.refine) {
#pragma omp parallel for schedule(dynamic, 64)
    for (int k = 0; k < N; ++k) {
      const Refined r = refine_at(f, grid.node(k), f.closest[k]);
      f.envelope[k] = std::min(f.envelope[k], r.value);
      f.closest_param[k] = r.param;
    }
  }
  f.values.resize(N);
  for (int k = 0; k < N; ++k) f.values[k] = f.sign() * f.envelope[k];

  const auto mask = domain_mask(grid, dom);
  f.ridge.assign(N, 0);
  f.detQ.assign(N, std::numeric_limits<double>::quiet_NaN());
  f.smooth = f.K.is_smooth() && opt.derivatives;
  if (f.smooth) {
    f.jets.resize(n);
#pragma omp parallel for schedule(dynamic, 8)
    for (int j = 0; j < n; ++j) {
      try {
        f.jets[j] = boundary_jet(f.Kpolar, f.phi, f.samples[j]);
      } catch (const Error&) {
        f.jets[j].valid = false;
      }
    }
  }
  double mu_min = kInf;
  for (const auto& jt : f.jets)
    if (jt.valid) mu_min = std::min(mu_min, jt.mu.norm());
  const double h = grid.h;
  for (int k = 0; k < N; ++k) {
    if (mask[k] != kInterior) continue;
    if (f.multiple[k]) f.ridge[k] = 1;
    if (!f.smooth) continue;
    const BoundaryJet& jt = f.jets[f.closest[k]];
    if (!jt.valid) continue;
    const double t = f.envelope[k] - f.phi_samples[f.closest[k]];
    f.detQ[k] = (Mat2::Identity() - t * jt.W).determinant();
    // Within 1.5 cells of the first caustic along this characteristic.
    if (std::isfinite(jt.caustic_depth) && (jt.caustic_depth - t) * jt.a.norm() <= 1.5 * h) f.ridge[k] = 1;
  }
  if (f.smooth) {
    // Jump of Drho = mu(closest point) between neighbours: the ridge passes
    // between them. Smooth variation is bounded by the local second
    // derivative over one cell plus the sampling error of the foot; weak
    // ridges (small jumps) show up only against that bound.
    std::vector<double> d2(N, kInf);
    for (int k = 0; k < N; ++k) {
      if (mask[k] != kInterior || !(f.detQ[k] > 0)) continue;
      const BoundaryJet& jt = f.jets[f.closest[k]];
      if (!jt.valid) continue;
      const double t = f.envelope[k] - f.phi_samples[f.closest[k]];
      const Mat2 Q = Mat2::Identity() - t * jt.W;
      d2[k] = (jt.d2rho * Q.inverse()).norm() * h + jt.d2rho.norm() * f.spacing;
    }
    for (int jy = 0; jy < grid.ny; ++jy)
      for (int ix = 0; ix < grid.nx; ++ix) {
        const int k = grid.index(ix, jy);
        if (mask[k] != kInterior || !f.jets[f.closest[k]].valid) continue;
        for (int d = 0; d < 2; ++d) {
          const int a = ix + kDirI[d], b = jy + kDirJ[d];
          if (!grid.in_range(a, b)) continue;
          const int k2 = grid.index(a, b);
          if (mask[k2] != kInterior || !f.jets[f.closest[k2]].valid) continue;
          const double smooth_bound = 2 * std::max(d2[k], d2[k2]);
          if ((f.jets[f.closest[k]].mu - f.jets[f.closest[k2]].mu).norm() > std::min(0.5 * mu_min, smooth_bound)) {
            f.ridge[k] = 1;
            f.ridge[k2] = 1;
          }
        }
      }
  }
  f.ridge_boundary_distance = kInf;
  for (int k = 0; k < N; ++k)
    if (f.ridge[k]) f.ridge_boundary_distance = std::min(f.ridge_boundary_distance, dom.project(grid.node(k)).d);
  return f;
}

InteriorHessian d2rho_interior(const ObstacleField& f, const Vec2& x, double det_tol) {
  require(f.smooth, ErrorKind::nondifferentiable, "derivative formulas need a smooth body");
  const ClosestPointResult cp = f.closest_points(x);
  require(!cp.is_multiple, ErrorKind::nondifferentiable, "multiple closest points");
  const BoundarySample y = f.domain.at(cp.param);
  const BoundaryJet jt = boundary_jet(f.Kpolar, f.phi, y);
  InteriorHessian out;
  out.foot = y.point;
  out.depth = cp.value - f.phi.value(y.point);
  const Mat2 Q = Mat2::Identity() - out.depth * jt.W;
  out.detQ = Q.determinant();
  require(out.detQ > det_tol, ErrorKind::ridge_proximity, "det Q vanishes: point on or beyond the ridge");
  out.d2rho = jt.d2rho * Q.inverse();
  out.d2rho = 0.5 * (out.d2rho + out.d2rho.transpose());
  out.characteristic_residual = (x - (y.point + out.depth * jt.a)).norm();
  return out;
}

MonotonicityReport monotonicity_check(const ObstacleField& f, int probes, unsigned seed, double tol) {
  require(f.smooth, ErrorKind::invalid_argument, "monotonicity check needs a smooth body");
  MonotonicityReport rep;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(f.samples.size()) - 1);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int attempts = 0;
  while (rep.probes < probes && attempts < 50 * probes) {
    ++attempts;
    const int j = pick(rng);
    const BoundaryJet& jt = f.jets[j];
    if (!jt.valid) continue;
    const BoundarySample& y = f.samples[j];
    // Extent of the minimizing part of the characteristic.
    auto minimizing = [&](double t) {
      const Vec2 x = y.point + t * jt.a;
      if (!f.domain.contains(x)) return false;
      return f.envelope_at(x) >= t + f.phi_samples[j] - 1e-10;
    };
    double lo = 0, hi = std::isfinite(jt.caustic_depth) ? jt.caustic_depth : 1e3;
    if (!minimizing(1e-6)) continue;
    if (minimizing(0.999 * hi)) {
      lo = 0.999 * hi;
    } else {
      for (int it = 0; it < 40; ++it) {
        const double m = 0.5 * (lo + hi);
        (minimizing(m) ? lo : hi) = m;
      }
    }
    const double tend = 0.95 * lo;
    if (tend <= 0) continue;
    double t1 = U(rng) * tend, t2 = U(rng) * tend;
    if (t1 > t2) std::swap(t1, t2);
    const double th = U(rng) * kTwoPi;
    const Vec2 xi(std::cos(th), std::sin(th));
    auto closed = [&](double t) -> Mat2 { return jt.d2rho * (Mat2::Identity() - t * jt.W).inverse(); };
    const double q1 = xi.dot(closed(t1) * xi), q2 = xi.dot(closed(t2) * xi);
    const double viol = q2 - q1;
    rep.max_violation = std::max(rep.max_violation, viol);
    if (viol > tol) ++rep.violations;
    // RK4 on M' = -M G M from the boundary value.
    // the solution stiffens towards the caustic; keep ds |M G| small
    const double stiff = t2 * closed(t2).norm() * jt.G.norm();
    const int steps = static_cast<int>(std::clamp(std::ceil(stiff / 0.01), 64.0, 1e5));
    const double ds = t2 / steps;
    Mat2 M = jt.d2rho;
    auto rhs = [&](const Mat2& A) -> Mat2 { return -A * jt.G * A; };
    for (int s = 0; s < steps; ++s) {
      rep.riccati_max_qdot = std::max(rep.riccati_max_qdot, xi.dot(rhs(M) * xi));
      const Mat2 k1 = rhs(M), k2 = rhs(M + 0.5 * ds * k1), k3 = rhs(M + 0.5 * ds * k2), k4 = rhs(M + ds * k3);
      M += ds / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    const double scale = 1.0 + closed(t2).norm();
    rep.riccati_mismatch = std::max(rep.riccati_mismatch, (M - closed(t2)).norm() / scale);
    ++rep.probes;
  }
  rep.report.title = "characteristic monotonicity";
  rep.report.add("probes", rep.probes == probes, rep.probes, probes);
  rep.report.add("monotone_second_derivative", rep.violations == 0, rep.max_violation, tol);
  rep.report.add("riccati_qdot_nonpositive", rep.riccati_max_qdot <= tol, rep.riccati_max_qdot, tol);
  rep.report.add("riccati_matches_closed_form", rep.riccati_mismatch <= 1e-6, rep.riccati_mismatch, 1e-6);
  return rep;
}

}  // namespace gradcon

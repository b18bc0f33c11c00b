#include "gradcon/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gradcon {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> unknown_values(const DoubleObstacleResult& res) {
  const Stencil& st = *res.stencil;
  std::vector<double> u(st.size());
  for (int i = 0; i < st.size(); ++i) u[i] = res.u[st.nodes[i]];
  return u;
}

std::string node_text(const Grid2D& g, int k) {
  std::ostringstream os;
  os << "(" << g.node(k).x() << ", " << g.node(k).y() << ")";
  return os.str();
}

}  // namespace

std::vector<std::uint8_t> CoincidenceDecomposition::band(int width) const {
  std::vector<std::uint8_t> b(grid.size(), 0);
  for (int c : free_boundary) {
    const int i0 = grid.ix(c), j0 = grid.jy(c);
    for (int j = j0 - width; j <= j0 + 1 + width; ++j)
      for (int i = i0 - width; i <= i0 + 1 + width; ++i)
        if (grid.in_range(i, j)) b[grid.index(i, j)] = 1;
  }
  return b;
}

double coincidence_tolerance(const ObstacleField& upper, const ObstacleField& lower) {
  const double h = upper.grid.h;
  double S = 0;
  bool any = false;
  for (const ObstacleField* f : {&upper, &lower})
    for (const auto& jt : f->jets)
      if (jt.valid) {
        S = std::max(S, jt.d2rho.norm());
        any = true;
      }
  if (!any) S = 1.0 / h;  // nonsmooth body: no boundary jets, fall back to the grid scale
  return std::max(1e-8, 5 * h * h * S);
}

CoincidenceDecomposition decompose(const DoubleObstacleResult& res, const ObstacleField& upper,
                                   const ObstacleField& lower, double tol_p) {
  const Grid2D& g = res.grid;
  require(g.same(upper.grid) && g.same(lower.grid), ErrorKind::invalid_argument, "decompose: grid mismatch");
  CoincidenceDecomposition dec;
  dec.grid = g;
  dec.tol_p = tol_p;
  dec.E.assign(g.size(), 0);
  dec.P_plus.assign(g.size(), 0);
  dec.P_minus.assign(g.size(), 0);
  for (int k = 0; k < g.size(); ++k) {
    if (!std::isfinite(res.u[k])) continue;
    if (res.u[k] >= upper.values[k] - tol_p)
      dec.P_plus[k] = 1;
    else if (res.u[k] <= lower.values[k] + tol_p)
      dec.P_minus[k] = 1;
    else
      dec.E[k] = 1;
  }
  for (int j = 0; j + 1 < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) {
      bool e = false, p = false;
      for (int c = 0; c < 4; ++c) {
        const int k = g.index(i + (c & 1), j + (c >> 1));
        e |= dec.E[k] != 0;
        p |= dec.P_plus[k] || dec.P_minus[k];
      }
      if (e && p) dec.free_boundary.push_back(g.index(i, j));
    }
  return dec;
}

GradientConstraintReport gradient_constraint(const DoubleObstacleResult& res, const ConvexBody& Kpolar, double tol) {
  const Stencil& st = *res.stencil;
  const std::vector<double> u = unknown_values(res);
  GradientConstraintReport out;
  out.H.assign(res.grid.size(), kNaN);
  out.active.assign(res.grid.size(), 0);
  out.max_violation = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < st.size(); ++i) {
    const double H = Kpolar.gauge(stencil_gradient(st, i, u.data())) - 1.0;
    const int k = st.nodes[i];
    out.H[k] = H;
    out.active[k] = std::abs(H) <= tol;
    out.max_violation = std::max(out.max_violation, H);
  }
  out.report.title = "gradient constraint";
  out.report.add("max_H", out.max_violation <= tol, out.max_violation, tol, "gamma°(D_h u) - 1");
  return out;
}

Report check_theorem2(const DoubleObstacleResult& res, const CoincidenceDecomposition& dec, const ConvexBody& K,
                      int band_width) {
  const Grid2D& g = res.grid;
  const double tol = res.tol_c;
  const ConvexBody Kp = K.polar();
  const GradientConstraintReport gc = gradient_constraint(res, Kp, tol);
  const std::vector<std::uint8_t> band = dec.band(band_width);

  int bad_out = 0, bad_in = 0, worst_k = -1;
  double worst = 0;
  for (int k : res.stencil->nodes) {
    const double T = std::max(res.Fh[k], gc.H[k]);
    if (std::abs(T) <= tol) continue;
    if (band[k]) {
      ++bad_in;
      continue;
    }
    ++bad_out;
    if (std::abs(T) > worst) {
      worst = std::abs(T);
      worst_k = k;
    }
  }

  // direction fan: difference quotients along xi with gamma(xi) = 1
  const int nfan = 32;
  double fan_worst = -std::numeric_limits<double>::infinity();
  for (int k : res.stencil->nodes) {
    const Vec2 x = g.node(k);
    for (int m = 0; m < nfan; ++m) {
      const double th = 2 * M_PI * m / nfan;
      const Vec2 v(std::cos(th), std::sin(th));
      const double tau = 2 * g.h * K.gauge(v);  // x + tau xi = x + 2h v
      const double uz = interpolate(g, res.u, x + 2 * g.h * v);
      if (!std::isfinite(uz)) continue;
      fan_worst = std::max(fan_worst, (uz - res.u[k]) / tau);
    }
  }

  Report r;
  r.title = "double-obstacle equivalence";
  std::ostringstream det;
  det << "nodes with |max{F_h, H}| > tol_c outside a " << band_width << "-cell band: " << bad_out << ", inside: " << bad_in;
  if (worst_k >= 0) det << ", worst at " << node_text(g, worst_k);
  r.add("max_F_H_residual", bad_out == 0, worst, tol, det.str());
  r.add("gradient_constraint", gc.max_violation <= tol, gc.max_violation, tol, "max gamma°(D_h u) - 1");
  r.add("direction_fan", fan_worst <= 1 + tol, fan_worst, 1 + tol, "max D_xi u over gamma(xi) = 1");
  return r;
}

Report check_prop_3_5(const DoubleObstacleResult& res, const CoincidenceDecomposition& dec, const ConvexBody& K,
                      double tol_H, int band_width) {
  const GradientConstraintReport gc = gradient_constraint(res, K.polar(), tol_H);
  const std::vector<std::uint8_t> band = dec.band(band_width);
  int sym_p = 0, sym_e = 0, sym_p_band = 0;
  for (int k : res.stencil->nodes) {
    const bool P = dec.P_plus[k] || dec.P_minus[k];
    const bool act = std::abs(gc.H[k]) <= tol_H;
    const bool neg = gc.H[k] < -tol_H;
    if (P != act) {
      if (band[k])
        ++sym_p_band;
      else
        ++sym_p;
    }
    if (dec.E[k] != neg && !band[k]) ++sym_e;
  }
  Report r;
  r.title = "coincidence set equals {H = 0}";
  r.add("P_vs_active", sym_p == 0, sym_p, 0.0,
        "symmetric difference outside the band (" + std::to_string(sym_p_band) + " inside)");
  r.add("E_vs_negative", sym_e == 0, sym_e, 0.0, "symmetric difference outside the band");
  r.add("tol_H", true, tol_H, 0.0);
  return r;
}

Report check_prop_3_3(const CoincidenceDecomposition& dec, const ObstacleField& upper, const ObstacleField& lower) {
  const Grid2D& g = dec.grid;
  int hit_p = 0, hit_m = 0;
  std::vector<int> rp, rm, pp, pm;
  for (int k = 0; k < g.size(); ++k) {
    if (upper.ridge[k]) rp.push_back(k);
    if (lower.ridge[k]) rm.push_back(k);
    if (dec.P_plus[k]) pp.push_back(k);
    if (dec.P_minus[k]) pm.push_back(k);
    hit_p += upper.ridge[k] && dec.P_plus[k];
    hit_m += lower.ridge[k] && dec.P_minus[k];
  }
  auto min_dist = [&](const std::vector<int>& a, const std::vector<int>& b) {
    double d = std::numeric_limits<double>::infinity();
    for (int x : a)
      for (int y : b) d = std::min(d, std::hypot(g.ix(x) - g.ix(y), g.jy(x) - g.jy(y)));
    return d;
  };
  Report r;
  r.title = "ridge avoids coincidence set";
  r.add("ridge_upper_and_P_plus", hit_p == 0, hit_p, 0.0, "distance in cells " + std::to_string(min_dist(rp, pp)));
  r.add("ridge_lower_and_P_minus", hit_m == 0, hit_m, 0.0, "distance in cells " + std::to_string(min_dist(rm, pm)));
  return r;
}

Report check_lemma_3_2(const DoubleObstacleResult& res, const CoincidenceDecomposition& dec, const ObstacleField& upper,
                       const ObstacleField& lower, int max_nodes) {
  const Grid2D& g = res.grid;
  const double h = g.h;
  Report r;
  r.title = "plastic segments";
  for (int side = 0; side < 2; ++side) {
    const ObstacleField& f = side == 0 ? upper : lower;
    const auto& mask = side == 0 ? dec.P_plus : dec.P_minus;
    std::vector<double> gap(g.size(), kNaN);  // distance of u from the obstacle, >= 0
    for (int k = 0; k < g.size(); ++k)
      if (std::isfinite(res.u[k])) gap[k] = side == 0 ? f.values[k] - res.u[k] : res.u[k] - f.values[k];
    std::vector<int> nodes;
    for (int k = 0; k < g.size(); ++k)
      if (mask[k]) nodes.push_back(k);
    const int stride = std::max<int>(1, static_cast<int>(nodes.size()) / std::max(1, max_nodes));
    double worst = 0;
    int segments = 0, points = 0;
    for (std::size_t s = 0; s < nodes.size(); s += stride) {
      const int k = nodes[s];
      const Vec2 x = g.node(k);
      const Vec2 y = f.domain.point(f.closest_param[k]);
      const double len = (y - x).norm();
      ++segments;
      for (double t = 1.5 * h; t < len; t += 0.5 * h) {
        const double v = interpolate(g, gap, x + t / len * (y - x));
        if (!std::isfinite(v)) continue;
        ++points;
        worst = std::max(worst, v);
      }
    }
    const std::string name = side == 0 ? "segments_in_P_plus" : "segments_in_P_minus";
    r.add(name, worst <= 2 * dec.tol_p, worst, 2 * dec.tol_p,
          std::to_string(segments) + " segments, " + std::to_string(points) + " points");
  }
  return r;
}

RadiusFit fit_free_boundary_radius(const DoubleObstacleResult& res, const Vec2& center) {
  const Grid2D& g = res.grid;
  std::vector<double> r;
  for (int k = 0; k < g.size(); ++k) {
    if (res.cls[k] != kElastic) continue;
    for (int d : {0, 1, 4, 5}) {
      const int i = g.ix(k) + kDirI[d], j = g.jy(k) + kDirJ[d];
      if (!g.in_range(i, j)) continue;
      const int n = g.index(i, j);
      if (res.cls[n] == kPlasticPlus) r.push_back((0.5 * (g.node(k) + g.node(n)) - center).norm());
    }
  }
  RadiusFit fit;
  fit.edges = static_cast<int>(r.size());
  if (r.empty()) return fit;
  for (double v : r) fit.mean += v;
  fit.mean /= r.size();
  for (double v : r) fit.stddev += (v - fit.mean) * (v - fit.mean);
  fit.stddev = std::sqrt(fit.stddev / r.size());
  return fit;
}

double max_second_difference(const DoubleObstacleResult& res) {
  const Stencil& st = *res.stencil;
  const std::vector<double> u = unknown_values(res);
  double m = 0;
  for (int i = 0; i < st.size(); ++i) {
    bool uncut = true;
    for (int d = 0; d < 8; ++d) uncut &= st.arm(i, d).nbr >= 0;
    if (!uncut) continue;
    for (int d = 0; d < 4; ++d) m = std::max(m, std::abs(stencil_second_difference(st, i, d, u.data())));
  }
  return m;
}

namespace {

struct LevelSolve {
  DoubleObstacleResult res;
  std::vector<double> rho;
};

LevelSolve solve_level(const EllipticOperator& op, const Domain2D& dom, const BoundaryDatum& phi, const ConvexBody& K,
                       double h, const PenaltyConfig& cfg) {
  double eps_max = 3 * h;
  for (double e : cfg.epsilons) eps_max = std::max(eps_max, e);
  const Grid2D g = make_grid(dom, h, static_cast<int>(std::ceil(eps_max / h)) + 3);
  ObstacleOptions oo;
  oo.exec = cfg.exec;
  const ObstacleField up = build_obstacle(dom, K, phi, g, ObstacleSide::upper, oo);
  const ObstacleField lo = build_obstacle(dom, K, phi, g, ObstacleSide::lower, oo);
  const ObstaclePair pair = make_obstacle_pair(up, lo, dom, K.lipschitz());
  return {solve_double_obstacle(op, pair, dom, phi, cfg), up.values};
}

}  // namespace

PipelineResult run_approximation_pipeline(const EllipticOperator& op, const Domain2D& dom, const BoundaryDatum& phi,
                                          const ConvexBody& Kpolar, const PipelineOptions& opt) {
  require(!opt.levels.empty(), ErrorKind::invalid_argument, "pipeline needs at least one level");
  PipelineResult out;
  out.report.title = "approximation pipeline";

  // a smooth constraint set needs no approximation
  const bool smooth = Kpolar.kind() != BodyKind::polygon;
  std::vector<int> levels = opt.levels;
  if (smooth) levels.resize(1);

  std::vector<double> prev_u, prev_rho;
  ConvexBody last_K = ConvexBody::ball(1);
  for (int k : levels) {
    const ConvexBody K = smooth ? Kpolar.polar() : Kpolar.smooth_approximation(k).polar();
    last_K = K;
    LevelSolve ls = solve_level(op, dom, phi, K, opt.h, opt.solver);
    PipelineLevel lv;
    lv.k = k;
    lv.sup_F = ls.res.sup_F;
    lv.max_d2 = max_second_difference(ls.res);
    for (auto c : ls.res.cls) lv.plastic_nodes += c == kPlasticPlus || c == kPlasticMinus;
    if (!prev_u.empty()) {
      for (std::size_t n = 0; n < prev_u.size(); ++n) {
        if (!std::isfinite(prev_u[n]) || !std::isfinite(ls.res.u[n])) continue;
        lv.cauchy = std::max(lv.cauchy, std::abs(ls.res.u[n] - prev_u[n]));
        lv.rho_increase = std::max(lv.rho_increase, ls.rho[n] - prev_rho[n]);
      }
    }
    out.levels.push_back(lv);
    prev_u = ls.res.u;
    prev_rho = ls.rho;
    for (int n = 0; n < ls.res.grid.size(); ++n)
      if (!std::isfinite(ls.res.u[n])) prev_rho[n] = kNaN;
  }
  out.u_last = prev_u;

  double fmin = std::numeric_limits<double>::infinity(), fmax = 0, rho_up = 0, growth = 0;
  bool cauchy_dec = true;
  for (std::size_t i = 0; i < out.levels.size(); ++i) {
    const auto& lv = out.levels[i];
    fmin = std::min(fmin, lv.sup_F);
    fmax = std::max(fmax, lv.sup_F);
    rho_up = std::max(rho_up, lv.rho_increase);
    if (i >= 1) growth = std::max(growth, lv.max_d2 / out.levels[i - 1].max_d2);
    if (i >= 2 && !(lv.cauchy < out.levels[i - 1].cauchy)) cauchy_dec = false;
  }
  out.report.add("bounded_F", fmax <= 1.2 * fmin + 1e-9, fmax / fmin, 1.2, "max over levels of sup|F_h[u_k]| / min");
  out.report.add("cauchy_decreasing", cauchy_dec, out.levels.back().cauchy, 0.0, "sup|u_k - u_{k-1}| at the last level");
  out.report.add("rho_monotone", rho_up <= 1e-8, rho_up, 1e-8, "max increase of rho_k over levels");
  if (out.levels.size() > 1) out.report.add("second_difference_growth", growth <= 1.1, growth, 1.1, "max ratio across levels");

  if (opt.refine) {
    LevelSolve fine = solve_level(op, dom, phi, last_K, 0.5 * opt.h, opt.solver);
    out.refinement_ratio = max_second_difference(fine.res) / out.levels.back().max_d2;
    out.report.add("second_difference_refinement", out.refinement_ratio <= 1.1, out.refinement_ratio, 1.1,
                   "max second difference at h/2 over that at h");
  }
  return out;
}

}  // namespace gradcon

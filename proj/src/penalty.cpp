#include "gradcon/penalty.hpp"

#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gradcon {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Sparse Jacobian over a fixed stencil pattern. BiCGSTAB with an incomplete
// LU preconditioner; falls back to a direct factorization if it stalls.
class JacobianSolver {
 public:
  explicit JacobianSolver(const Stencil& st) : st_(st), A_(st.size(), st.size()) {}

  // rows[i] holds the linearization of row i.
  std::vector<double> solve(const std::vector<NodeLin>& rows, const std::vector<double>& rhs) {
    const int n = st_.size();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(9 * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      trip.emplace_back(i, i, rows[i].diag);
      for (int d = 0; d < 8; ++d) {
        const int nb = st_.arm(i, d).nbr;
        if (nb >= 0 && rows[i].arm[d] != 0.0) trip.emplace_back(i, nb, rows[i].arm[d]);
      }
    }
    A_.setFromTriplets(trip.begin(), trip.end());
    Eigen::Map<const VecX> b(rhs.data(), n);
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double, Eigen::RowMajor>, Eigen::IncompleteLUT<double>> it;
    it.preconditioner().setDroptol(1e-5);
    it.preconditioner().setFillfactor(8);
    // inexact Newton: forcing term tightens as the residual shrinks
    double binf = 0;
    for (double v : rhs) binf = std::max(binf, std::abs(v));
    it.setTolerance(std::clamp(0.1 * binf, 1e-13, 1e-3));
    it.setMaxIterations(2000);
    it.compute(A_);
    VecX x;
    if (it.info() == Eigen::Success) {
      x = it.solve(b);
      if (it.info() == Eigen::Success || (A_ * x - b).norm() <= 1e-10 * b.norm()) return {x.data(), x.data() + n};
    }
    Eigen::SparseMatrix<double> Ac = A_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu(Ac);
    require(lu.info() == Eigen::Success, ErrorKind::nonconvergence, "sparse factorization failed");
    x = lu.solve(b);
    return {x.data(), x.data() + n};
  }

 private:
  const Stencil& st_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> A_;
};

double norm2(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double norm_inf(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

BetaValue beta(double delta, double t) {
  if (t <= 0) return {0.0, 0.0};
  if (t >= delta) return {t / delta, 1.0 / delta};
  const double s = t / delta;
  return {2 * s * s - s * s * s, (4 * s - 3 * s * s) / delta};
}

void PenaltyConfig::validate() const {
  require(delta > 0 && delta0 > 0 && delta <= delta0, ErrorKind::invalid_argument, "penalty scales must satisfy 0 < delta <= delta0");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    require(epsilons[i] > 0, ErrorKind::invalid_argument, "epsilon must be positive");
    if (i > 0) require(epsilons[i] < epsilons[i - 1], ErrorKind::invalid_argument, "epsilon schedule must be strictly decreasing");
  }
  require(newton.max_iters > 0 && newton.residual_tol > 0, ErrorKind::invalid_argument, "bad Newton settings");
}

ObstaclePair make_obstacle_pair(const ObstacleField& upper, const ObstacleField& lower, const Domain2D& dom,
                                double C1) {
  require(upper.grid.same(lower.grid), ErrorKind::invalid_argument, "obstacle grids differ");
  require(upper.side == ObstacleSide::upper && lower.side == ObstacleSide::lower, ErrorKind::invalid_argument,
          "obstacle sides swapped");
  ObstaclePair p;
  p.grid = upper.grid;
  p.plus = upper.values;
  p.minus = lower.values;
  p.inside = domain_mask(p.grid, dom);
  for (auto& m : p.inside) m = m == kInterior;
  p.dist = distance_field(p.grid, dom);
  for (auto& d : p.dist) d = std::abs(d);
  p.C1 = C1;
  return p;
}

ObstaclePair make_obstacle_pair(const Grid2D& g, const Domain2D& dom, const std::function<double(const Vec2&)>& plus,
                                const std::function<double(const Vec2&)>& minus, double C1) {
  ObstaclePair p;
  p.grid = g;
  p.plus.resize(g.size());
  p.minus.resize(g.size());
  for (int k = 0; k < g.size(); ++k) {
    p.plus[k] = plus(g.node(k));
    p.minus[k] = minus(g.node(k));
  }
  p.inside = domain_mask(g, dom);
  for (auto& m : p.inside) m = m == kInterior;
  p.dist = distance_field(g, dom);
  for (auto& d : p.dist) d = std::abs(d);
  p.C1 = C1;
  return p;
}

MollifiedObstacles mollify_obstacles(const ObstaclePair& obs, double epsilon, double C2, Exec exec) {
  const Grid2D& g = obs.grid;
  const double h = g.h, C1 = obs.C1;
  require(epsilon >= 1.5 * h, ErrorKind::invalid_argument, "epsilon must be at least 1.5 h");
  require(C1 > 0, ErrorKind::invalid_argument, "Lipschitz constant must be positive");

  MollifiedObstacles mo;
  mo.grid = g;
  mo.epsilon = epsilon;
  mo.C1 = C1;
  mo.delta_eps = 3.5 * C1 * epsilon;
  mo.report.title = "mollified obstacles";

  auto nb = [&](int k, int d, int s) -> int {
    const int i = g.ix(k) + s * kDirI[d], j = g.jy(k) + s * kDirJ[d];
    return g.in_range(i, j) ? g.index(i, j) : -1;
  };
  auto step = [&](int d) { return d < 2 ? h : std::sqrt(2.0) * h; };

  // preconditions on the input obstacles
  double lip_worst = 0, gap_low = std::numeric_limits<double>::infinity(), gap_excess = 0;
  for (int k = 0; k < g.size(); ++k) {
    if (!obs.inside[k]) continue;
    for (int d = 0; d < 4; ++d) {
      const int n = nb(k, d, 1);
      if (n < 0 || !obs.inside[n]) continue;
      const double L = step(d);
      lip_worst = std::max({lip_worst, std::abs(obs.plus[n] - obs.plus[k]) / L, std::abs(obs.minus[n] - obs.minus[k]) / L});
    }
    const double gap = obs.plus[k] - obs.minus[k];
    gap_low = std::min(gap_low, gap);
    gap_excess = std::max(gap_excess, gap - 2 * C1 * obs.dist[k]);
  }
  const double pre_tol = 1e-7;
  std::ostringstream why;
  if (lip_worst > C1 * (1 + pre_tol) + pre_tol) why << "Lipschitz quotient " << lip_worst << " exceeds C1 = " << C1 << "; ";
  if (gap_low < -pre_tol) why << "upper obstacle below lower obstacle (gap " << gap_low << "); ";
  if (gap_excess > pre_tol) why << "gap exceeds 2 C1 d by " << gap_excess << "; ";
  require(why.str().empty(), ErrorKind::invalid_obstacles, why.str());
  mo.report.add("pre_lipschitz", true, lip_worst, C1);
  mo.report.add("pre_gap_bound", true, gap_excess, 0.0, "max of (psi+ - psi-) - 2 C1 d");

  // one-sided second-difference constant, estimated over all nodes with d > L
  double c2_est = 0;
  for (int k = 0; k < g.size(); ++k) {
    if (!obs.inside[k]) continue;
    for (int d = 0; d < 4; ++d) {
      const double L = step(d);
      if (obs.dist[k] <= L) continue;
      const int a = nb(k, d, 1), b = nb(k, d + 4, 1);
      if (a < 0 || b < 0) continue;
      const double sp = (obs.plus[a] + obs.plus[b] - 2 * obs.plus[k]) / (L * L);
      const double sm = (obs.minus[a] + obs.minus[b] - 2 * obs.minus[k]) / (L * L);
      c2_est = std::max({c2_est, sp * (obs.dist[k] - L), -sm * (obs.dist[k] - L)});
    }
  }
  if (C2 > 0) {
    mo.report.add("pre_semiconcavity", c2_est <= C2 * (1 + 1e-9), c2_est, C2, "estimated vs supplied C2");
    mo.C2 = C2;
  } else {
    mo.C2 = std::max(c2_est, 1e-12);
    mo.report.add("pre_semiconcavity", true, c2_est, 0.0, "estimated C2");
  }

  const ConvStencil ker = bump_stencil(epsilon, h);
  if (exec == Exec::serial) {
    mo.psi_plus_eps = convolve_serial(g, obs.plus, ker);
    mo.psi_minus_eps = convolve_serial(g, obs.minus, ker);
  } else {
    mo.psi_plus_eps = convolve_parallel(g, obs.plus, ker);
    mo.psi_minus_eps = convolve_parallel(g, obs.minus, ker);
  }
  for (auto& v : mo.psi_minus_eps) v += mo.delta_eps;

  mo.U_eps.assign(g.size(), 0);
  for (int k = 0; k < g.size(); ++k)
    mo.U_eps[k] = obs.inside[k] && std::isfinite(mo.psi_plus_eps[k]) && mo.psi_minus_eps[k] < mo.psi_plus_eps[k];

  // invariants
  const double tiny = 1e-10;
  double inv_plus = 0, lift_lo = std::numeric_limits<double>::infinity(), lift_hi = 0;
  int missing = 0, too_close = 0;
  double c2_ratio = 0;
  for (int k = 0; k < g.size(); ++k) {
    if (!obs.inside[k] || !std::isfinite(mo.psi_plus_eps[k])) continue;
    const double lift = mo.psi_minus_eps[k] - obs.minus[k];
    lift_lo = std::min(lift_lo, lift);
    lift_hi = std::max(lift_hi, lift);
    if (mo.U_eps[k]) {
      inv_plus = std::max(inv_plus, std::abs(mo.psi_plus_eps[k] - obs.plus[k]));
      if (obs.dist[k] <= epsilon) ++too_close;
    }
    if (obs.plus[k] - obs.minus[k] > 5 * C1 * epsilon + tiny && !mo.U_eps[k]) ++missing;
    for (int d = 0; d < 4; ++d) {
      const double L = step(d);
      if (obs.dist[k] <= epsilon + L) continue;
      const int a = nb(k, d, 1), b = nb(k, d + 4, 1);
      if (a < 0 || b < 0 || !std::isfinite(mo.psi_plus_eps[a]) || !std::isfinite(mo.psi_plus_eps[b])) continue;
      const double sp = (mo.psi_plus_eps[a] + mo.psi_plus_eps[b] - 2 * mo.psi_plus_eps[k]) / (L * L);
      const double sm = (mo.psi_minus_eps[a] + mo.psi_minus_eps[b] - 2 * mo.psi_minus_eps[k]) / (L * L);
      const double bound = mo.C2 / (obs.dist[k] - epsilon - L);
      c2_ratio = std::max({c2_ratio, sp / bound, -sm / bound});
    }
  }
  mo.report.add("plus_shift", inv_plus <= C1 * epsilon + tiny, inv_plus, C1 * epsilon, "sup |psi_eps+ - psi+| on U_eps");
  mo.report.add("minus_lift_low", lift_lo > 2 * C1 * epsilon, lift_lo, 2 * C1 * epsilon);
  mo.report.add("minus_lift_high", lift_hi < 5 * C1 * epsilon, lift_hi, 5 * C1 * epsilon);
  mo.report.add("inclusion_inner", missing == 0, missing, 0, "nodes with gap > 5 C1 eps outside U_eps");
  mo.report.add("inclusion_outer", too_close == 0, too_close, 0, "U_eps nodes with d <= eps");
  mo.report.add("second_difference_bound", c2_ratio <= 1 + 1e-8, c2_ratio, 1.0, "max of +-D2 psi_eps / (C2/(d-eps-L))");
  return mo;
}

PenaltyResult solve_penalized(const EllipticOperator& op, const MollifiedObstacles& mo, const PenaltyConfig& cfg,
                              const std::vector<double>* warm) {
  cfg.validate();
  const Grid2D& g = mo.grid;
  const Stencil st = stencil_on_set(g, mo.U_eps, mo.psi_plus_eps);
  const int n = st.size();
  require(n > 0, ErrorKind::invalid_state, "U_eps contains no grid nodes");
  const DiscreteOperator D(op, st);

  std::vector<double> pp(n), pm(n), u(n);
  for (int i = 0; i < n; ++i) {
    const int k = st.nodes[i];
    pp[i] = mo.psi_plus_eps[k];
    pm[i] = mo.psi_minus_eps[k];
    const double w = warm && std::isfinite((*warm)[k]) ? (*warm)[k] : 0.5 * (pp[i] + pm[i]);
    u[i] = w;
  }
  require(D.monotonicity_defect(u) <= 1e-12, ErrorKind::invalid_argument,
          "discretization is not monotone for this operator");

  PenaltyResult out;
  out.report.title = "penalized solve eps=" + fmt(mo.epsilon);
  JacobianSolver solver(st);
  std::vector<NodeLin> rows(n);
  std::vector<double> R(n), Rt(n), ut(n);

  auto eval = [&](const std::vector<double>& v, std::vector<double>& r, double delta, bool with_lin) {
    const double* vp = v.data();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      const BetaValue lo = beta(delta, pm[i] - vp[i]);
      const BetaValue hi = beta(delta, vp[i] - pp[i]);
      if (with_lin) {
        r[i] = D.residual_at(i, vp, &rows[i]) - lo.value + hi.value;
        rows[i].diag += lo.derivative + hi.derivative;
      } else {
        r[i] = D.residual_at(i, vp) - lo.value + hi.value;
      }
    }
  };

  std::vector<double> deltas;
  for (double d = cfg.delta0;; d = std::max(0.5 * d, cfg.delta)) {
    deltas.push_back(d);
    if (d <= cfg.delta * (1 + 1e-12)) break;
  }

  std::vector<double> history;
  for (double delta : deltas) {
    PenaltyLevel lvl;
    lvl.delta = delta;
    bool converged = false;
    int it = 0;
    for (; it <= cfg.newton.max_iters; ++it) {
      eval(u, R, delta, true);
      const double rinf = norm_inf(R);
      history.push_back(rinf);
      double vp = 0, vm = 0;
      for (int i = 0; i < n; ++i) {
        vp = std::max(vp, u[i] - pp[i]);
        vm = std::max(vm, pm[i] - u[i]);
      }
      out.log.push_back({"penalty eps=" + fmt(mo.epsilon) + " delta=" + fmt(delta), it, rinf, vp, vm});
      if (rinf <= cfg.newton.residual_tol) {
        converged = true;
        lvl.residual = rinf;
        break;
      }
      if (it == cfg.newton.max_iters) break;
      std::vector<double> rhs(n);
      for (int i = 0; i < n; ++i) rhs[i] = -R[i];
      const std::vector<double> du = solver.solve(rows, rhs);
      const double r0 = norm2(R);
      double alpha = 1.0;
      for (;;) {
        for (int i = 0; i < n; ++i) ut[i] = u[i] + alpha * du[i];
        eval(ut, Rt, delta, false);
        if (norm2(Rt) <= (1 - cfg.newton.armijo * alpha) * r0 || alpha <= cfg.newton.step_floor) break;
        alpha *= 0.5;
      }
      u.swap(ut);
    }
    if (!converged) {
      std::vector<double> last(g.size(), kNaN);
      for (int i = 0; i < n; ++i) last[st.nodes[i]] = u[i];
      throw NonconvergenceError("penalized Newton stalled at delta=" + fmt(delta) + ", residual " + fmt(history.back()),
                                history, last);
    }
    lvl.newton_iters = it;
    for (int i = 0; i < n; ++i) {
      lvl.violation_plus = std::max(lvl.violation_plus, u[i] - pp[i]);
      lvl.violation_minus = std::max(lvl.violation_minus, pm[i] - u[i]);
      lvl.C = std::max({lvl.C, beta(delta, u[i] - pp[i]).value, beta(delta, pm[i] - u[i]).value});
    }
    lvl.violation_plus = std::max(lvl.violation_plus, 0.0);
    lvl.violation_minus = std::max(lvl.violation_minus, 0.0);
    const double bound = delta * (lvl.C + 1);
    out.report.add("sandwich delta=" + fmt(delta), lvl.violation_plus <= bound && lvl.violation_minus <= bound,
                   std::max(lvl.violation_plus, lvl.violation_minus), bound, "violation <= delta (C+1)");
    out.levels.push_back(lvl);
  }
  out.report.add("residual", out.levels.back().residual <= cfg.newton.residual_tol, out.levels.back().residual,
                 cfg.newton.residual_tol);
  out.u.assign(g.size(), kNaN);
  for (int i = 0; i < n; ++i) out.u[st.nodes[i]] = u[i];
  return out;
}

namespace {

struct FinalCounts {
  int exceed = 0, ordered = 0;
};

// Fills u, F_h, the node classes and the complementarity residual
// max{min{F_h, u - psi-}, u - psi+} from unknown values u.
FinalCounts finalize(DoubleObstacleResult& res, const DiscreteOperator& D, const std::vector<double>& u,
                     const std::vector<double>& pp, const std::vector<double>& pm) {
  const Stencil& st = D.stencil();
  const Grid2D& g = res.grid;
  const int n = st.size();
  std::vector<double> F(n), G(n);
  std::vector<std::uint8_t> policy(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const double f = D.residual_at(i, u.data());
    const double a = u[i] - pm[i], b = u[i] - pp[i];
    const double m = std::min(f, a);
    F[i] = f;
    if (b >= m) {
      policy[i] = 1;
      G[i] = b;
    } else if (a <= f) {
      policy[i] = 2;
      G[i] = a;
    } else {
      policy[i] = 0;
      G[i] = f;
    }
  }
  res.u.assign(g.size(), kNaN);
  res.Fh.assign(g.size(), kNaN);
  res.cls.assign(g.size(), kOutside);
  res.sup_F = 0;
  res.complementarity = 0;
  for (int i = 0; i < n; ++i) {
    const int k = st.nodes[i];
    res.u[k] = u[i];
    res.Fh[k] = F[i];
    res.sup_F = std::max(res.sup_F, std::abs(F[i]));
    res.cls[k] = policy[i] == 1 ? kPlasticPlus : policy[i] == 2 ? kPlasticMinus : kElastic;
  }
  res.tol_c = 10 * g.h * (1 + res.sup_F);
  FinalCounts fc;
  for (int i = 0; i < n; ++i) {
    res.complementarity = std::max(res.complementarity, std::abs(G[i]));
    if (std::abs(G[i]) > res.tol_c) ++fc.exceed;
    fc.ordered += u[i] < pm[i] || u[i] > pp[i];
  }
  return fc;
}

}  // namespace

DoubleObstacleResult solve_double_obstacle(const EllipticOperator& op, const ObstaclePair& obs, const Domain2D& dom,
                                           const BoundaryDatum& phi, const PenaltyConfig& cfg_in) {
  PenaltyConfig cfg = cfg_in;
  cfg.validate();
  const Grid2D& g = obs.grid;
  const double h = g.h;
  for (int k = 0; k < g.size(); ++k)
    require(!obs.inside[k] || obs.minus[k] <= obs.plus[k] + 1e-12, ErrorKind::invalid_input,
            "lower obstacle exceeds upper obstacle");
  if (cfg.epsilons.empty()) cfg.epsilons = {3 * h};

  DoubleObstacleResult res;
  res.grid = g;
  res.report.title = "double obstacle solve";

  const std::vector<double>* warm = nullptr;
  for (double eps : cfg.epsilons) {
    res.mollified.push_back(mollify_obstacles(obs, eps, -1.0, cfg.exec));
    res.stages.push_back(solve_penalized(op, res.mollified.back(), cfg, warm));
    warm = &res.stages.back().u;
    for (const auto& row : res.stages.back().log) res.log.push_back(row);
  }
  const MollifiedObstacles& mo = res.mollified.back();
  const PenaltyResult& pen = res.stages.back();

  auto st = std::make_shared<Stencil>(stencil_on_domain(g, dom, [&](const Vec2& x) { return phi.value(x); }));
  res.stencil = st;
  const int n = st->size();
  const DiscreteOperator D(op, *st);
  std::vector<double> pp(n), pm(n), u(n);
  res.extended.assign(g.size(), 0);
  for (int i = 0; i < n; ++i) {
    const int k = st->nodes[i];
    pp[i] = obs.plus[k];
    pm[i] = obs.minus[k];
    double v = pen.u[k];
    if (!std::isfinite(v)) {
      res.extended[k] = 1;
      v = std::isfinite(mo.psi_plus_eps[k]) ? 0.5 * (mo.psi_plus_eps[k] + mo.psi_minus_eps[k]) : 0.5 * (pp[i] + pm[i]);
    }
    u[i] = std::clamp(v, pm[i], pp[i]);
  }

  std::vector<NodeLin> rows(n);
  std::vector<double> F(n), G(n), Gt(n), ut(n);
  std::vector<std::uint8_t> policy(n);  // 0 equation, 1 upper, 2 lower
  // max{min{F, s(u - psi-)}, s(u - psi+)} with its active branch. The zero set
  // does not depend on s > 0; s ~ 1/h^2 puts both branches on the scale of F_h
  // so that policy switches do not jump across the obstacle gap.
  double scale = 1.0;
  auto comp = [&](const std::vector<double>& v, std::vector<double>& out, bool with_lin) {
    const double* vp = v.data();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      const double f = with_lin ? D.residual_at(i, vp, &rows[i]) : D.residual_at(i, vp);
      const double a = scale * (vp[i] - pm[i]), b = scale * (vp[i] - pp[i]);
      const double m = std::min(f, a);
      std::uint8_t pol;
      double val;
      if (b >= m) {
        pol = 1;
        val = b;
      } else if (a <= f) {
        pol = 2;
        val = a;
      } else {
        pol = 0;
        val = f;
      }
      out[i] = val;
      if (with_lin) {
        F[i] = f;
        policy[i] = pol;
      }
    }
  };

  if (cfg.final_complementarity) {
    require(D.monotonicity_defect(u) <= 1e-12, ErrorKind::invalid_argument,
            "discretization is not monotone for this operator");
    JacobianSolver solver(*st);
    scale = 1.0 / (h * h);
    std::vector<double> history;
    bool converged = false;
    int stalls = 0;
    for (int it = 0; it <= cfg.howard_max_iters; ++it) {
      comp(u, G, true);
      const double ginf = norm_inf(G);
      history.push_back(ginf);
      double vp = 0, vm = 0;
      for (int i = 0; i < n; ++i) {
        vp = std::max(vp, u[i] - pp[i]);
        vm = std::max(vm, pm[i] - u[i]);
      }
      res.log.push_back({"complementarity", it, ginf, vp, vm});
      if (ginf <= cfg.newton.residual_tol) {
        converged = true;
        break;
      }
      if (it == cfg.howard_max_iters) break;
      std::vector<double> rhs(n);
      for (int i = 0; i < n; ++i) {
        rhs[i] = -G[i];
        if (policy[i] != 0) {
          rows[i].diag = scale;
          rows[i].arm.fill(0.0);
        }
      }
      const std::vector<double> du = solver.solve(rows, rhs);
      // Policy iteration takes full steps; damping only after repeated stalls.
      if (it > 0 && ginf >= history[it - 1]) ++stalls;
      double alpha = 1.0;
      if (stalls > 5) {
        const double g0 = norm2(G);
        for (;;) {
          for (int i = 0; i < n; ++i) ut[i] = u[i] + alpha * du[i];
          comp(ut, Gt, false);
          if (norm2(Gt) <= (1 - cfg.newton.armijo * alpha) * g0 || alpha <= cfg.newton.step_floor) break;
          alpha *= 0.5;
        }
      }
      for (int i = 0; i < n; ++i) ut[i] = u[i] + alpha * du[i];
      u.swap(ut);
    }
    if (!converged) {
      std::vector<double> last(g.size(), kNaN);
      for (int i = 0; i < n; ++i) last[st->nodes[i]] = u[i];
      throw NonconvergenceError("complementarity iteration stalled, residual " + fmt(history.back()), history, last);
    }
  }

  double clamp_amount = 0;
  for (int i = 0; i < n; ++i) {
    const double c = std::clamp(u[i], pm[i], pp[i]);
    clamp_amount = std::max(clamp_amount, std::abs(c - u[i]));
    u[i] = c;
  }
  const FinalCounts fc = finalize(res, D, u, pp, pm);
  const int exceed = fc.exceed, ordered = fc.ordered;

  // |F_h[u_eps]| <= C + C/(d - eps) on U_eps, fitted C
  double Cfit = 0;
  {
    const Stencil se = stencil_on_set(g, mo.U_eps, mo.psi_plus_eps);
    const DiscreteOperator De(op, se);
    std::vector<double> ue(se.size());
    for (int i = 0; i < se.size(); ++i) ue[i] = pen.u[se.nodes[i]];
    std::vector<double> Fe;
    De.residual(ue, Fe, cfg.exec);
    for (int i = 0; i < se.size(); ++i) {
      const double d = obs.dist[se.nodes[i]];
      Cfit = std::max(Cfit, std::abs(Fe[i]) / (1 + 1 / (d - mo.epsilon)));
    }
  }

  res.report.add("complementarity", exceed == 0, res.complementarity, res.tol_c,
                 "max |max{min{F_h, u - psi-}, u - psi+}|; tol_c = 10 h (1 + sup|F_h|)");
  res.report.add("obstacle_order", ordered == 0, clamp_amount, 0.0, "psi- <= u <= psi+ (clamp applied)");
  res.report.add("sup_F_h", true, res.sup_F, 0.0);
  res.report.add("penalized_F_bound_C", true, Cfit, 0.0, "fitted C in |F_h[u_eps]| <= C + C/(d - eps)");
  int ext = 0;
  for (auto e : res.extended) ext += e;
  res.report.add("extended_nodes", true, ext, 0.0, "nodes of U outside U_eps initialized by the obstacle average");
  for (const auto& l : mo.report.lines) res.report.lines.push_back(l);
  for (const auto& l : pen.report.lines) res.report.lines.push_back(l);
  return res;
}

DoubleObstacleResult certify_solution(const EllipticOperator& op, const ObstaclePair& obs, const Domain2D& dom,
                                      const BoundaryDatum& phi, const std::vector<double>& u_grid) {
  const Grid2D& g = obs.grid;
  require(static_cast<int>(u_grid.size()) == g.size(), ErrorKind::invalid_input, "certify: field size mismatch");
  DoubleObstacleResult res;
  res.grid = g;
  res.report.title = "certification";
  auto st = std::make_shared<Stencil>(stencil_on_domain(g, dom, [&](const Vec2& x) { return phi.value(x); }));
  res.stencil = st;
  const int n = st->size();
  std::vector<double> pp(n), pm(n), u(n);
  for (int i = 0; i < n; ++i) {
    const int k = st->nodes[i];
    pp[i] = obs.plus[k];
    pm[i] = obs.minus[k];
    u[i] = u_grid[k];
    require(std::isfinite(u[i]), ErrorKind::invalid_input, "certify: field is not finite at a node of U");
  }
  res.extended.assign(g.size(), 0);
  const DiscreteOperator D(op, *st);
  const FinalCounts fc = finalize(res, D, u, pp, pm);
  res.report.add("complementarity", fc.exceed == 0, res.complementarity, res.tol_c,
                 "max |max{min{F_h, u - psi-}, u - psi+}|; tol_c = 10 h (1 + sup|F_h|)");
  res.report.add("obstacle_order", fc.ordered == 0, fc.ordered, 0.0, "nodes with u outside [psi-, psi+]");
  res.report.add("sup_F_h", true, res.sup_F, 0.0);
  return res;
}

Report comparison_check(const DoubleObstacleResult& res, const std::vector<double>& v, const EllipticOperator& op,
                        const ObstaclePair& obs, double tol, double sub_tol) {
  const Stencil& st = *res.stencil;
  const DiscreteOperator D(op, st);
  const int n = st.size();
  std::vector<double> vv(n);
  for (int i = 0; i < n; ++i) vv[i] = v[st.nodes[i]];
  std::vector<double> Fv;
  D.residual(vv, Fv, Exec::serial);
  int excluded = 0, checked = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const int k = st.nodes[i];
    const bool ok = std::isfinite(vv[i]) && Fv[i] <= sub_tol && vv[i] >= obs.minus[k] - tol && vv[i] <= obs.plus[k] + tol;
    if (!ok) {
      ++excluded;
      continue;
    }
    ++checked;
    worst = std::max(worst, vv[i] - res.u[k]);
  }
  Report r;
  r.title = "comparison";
  r.add("subsolution_nodes", checked > 0, checked, 0.0, "nodes where F_h[v] <= tol and psi- <= v <= psi+");
  r.add("excluded_nodes", true, excluded, 0.0);
  r.add("v_le_u", checked == 0 || worst <= tol, checked ? worst : 0.0, tol, "max (v - u) over subsolution nodes");
  return r;
}

}  // namespace gradcon

#include "gradcon/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gradcon {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

Stencil empty_stencil(const Grid2D& g) {
  Stencil st;
  st.grid = g;
  st.unknown.assign(g.size(), -1);
  return st;
}

}  // namespace

Stencil stencil_on_domain(const Grid2D& g, const Domain2D& dom, const std::function<double(const Vec2&)>& g_bc) {
  Stencil st = empty_stencil(g);
  std::vector<std::uint8_t> inside(g.size(), 0);
  for (int k = 0; k < g.size(); ++k) {
    inside[k] = dom.contains(g.node(k));
    if (inside[k]) {
      st.unknown[k] = st.size();
      st.nodes.push_back(k);
    }
  }
  st.arms.resize(8 * st.nodes.size());
  for (int n = 0; n < st.size(); ++n) {
    const int k = st.nodes[n];
    const int i = g.ix(k), j = g.jy(k);
    const Vec2 x = g.node(k);
    for (int d = 0; d < 8; ++d) {
      Arm& a = st.arms[8 * n + d];
      const int ni = i + kDirI[d], nj = j + kDirJ[d];
      require(g.in_range(ni, nj), ErrorKind::invalid_state, "grid margin too small for the stencil");
      const int nk = g.index(ni, nj);
      if (inside[nk]) {
        a.nbr = st.unknown[nk];
        continue;
      }
      const Vec2 y = g.node(nk);
      double lo = 0, hi = 1;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (dom.contains(x + mid * (y - x)))
          lo = mid;
        else
          hi = mid;
      }
      a.frac = std::max(0.5 * (lo + hi), 1e-6);
      a.bval = g_bc(x + a.frac * (y - x));
    }
  }
  return st;
}

Stencil stencil_on_set(const Grid2D& g, const std::vector<std::uint8_t>& in_set, const std::vector<double>& dirichlet) {
  require(static_cast<int>(in_set.size()) == g.size() && static_cast<int>(dirichlet.size()) == g.size(),
          ErrorKind::invalid_argument, "stencil_on_set: size mismatch");
  Stencil st = empty_stencil(g);
  for (int k = 0; k < g.size(); ++k)
    if (in_set[k]) {
      st.unknown[k] = st.size();
      st.nodes.push_back(k);
    }
  st.arms.resize(8 * st.nodes.size());
  for (int n = 0; n < st.size(); ++n) {
    const int k = st.nodes[n];
    for (int d = 0; d < 8; ++d) {
      const int ni = g.ix(k) + kDirI[d], nj = g.jy(k) + kDirJ[d];
      require(g.in_range(ni, nj), ErrorKind::invalid_state, "set touches the grid edge");
      const int nk = g.index(ni, nj);
      Arm& a = st.arms[8 * n + d];
      if (in_set[nk])
        a.nbr = st.unknown[nk];
      else {
        a.bval = dirichlet[nk];
        require(std::isfinite(a.bval), ErrorKind::invalid_state, "non-finite Dirichlet value");
      }
    }
  }
  return st;
}

// -tr(A M) = -sum alpha_d D_dd with D_dd the unit-direction second derivative
// along e1, e2, (1,1)/sqrt2, (-1,1)/sqrt2. Needs A diagonally dominant.
DiscreteOperator::Decomp DiscreteOperator::decompose(const LinearCoeffs& lc) {
  const double a12 = 0.5 * (lc.A(0, 1) + lc.A(1, 0));
  Decomp d;
  d.alpha[0] = lc.A(0, 0) - std::abs(a12);
  d.alpha[1] = lc.A(1, 1) - std::abs(a12);
  d.alpha[2] = a12 > 0 ? 2 * a12 : 0.0;
  d.alpha[3] = a12 < 0 ? -2 * a12 : 0.0;
  require(d.alpha[0] >= 0 && d.alpha[1] >= 0, ErrorKind::invalid_argument,
          "coefficient matrix not diagonally dominant; no monotone 9-point decomposition");
  d.b = lc.b;
  d.c = lc.c;
  d.f = lc.f;
  return d;
}

DiscreteOperator::DiscreteOperator(const EllipticOperator& op, const Stencil& st) : op_(op), st_(&st) {
  switch (op.kind) {
    case OperatorKind::linear:
      dec_ = decompose(op.lin);
      break;
    case OperatorKind::linear_x:
      node_dec_.resize(st.size());
      for (int i = 0; i < st.size(); ++i) node_dec_[i] = decompose(op.coefficients_at(st.grid.node(st.nodes[i])));
      break;
    case OperatorKind::bellman:
      for (const auto& c : op.family) fam_dec_.push_back(decompose(c));
      break;
    default:
      break;
  }
}

double DiscreteOperator::residual_at(int i, const double* u, NodeLin* lin) const {
  const Stencil& st = *st_;
  const double h = st.grid.h;
  const double ui = u[i];
  double val[8], th[8];
  for (int d = 0; d < 8; ++d) {
    const Arm& a = st.arms[8 * i + d];
    val[d] = a.nbr >= 0 ? u[a.nbr] : a.bval;
    th[d] = a.frac;
  }
  double D2[4], wp[4], wm[4];
  for (int d = 0; d < 4; ++d) {
    const double L = d < 2 ? h : kSqrt2 * h;
    const double tp = th[d], tm = th[d + 4];
    wp[d] = 2.0 / (L * L * tp * (tp + tm));
    wm[d] = 2.0 / (L * L * tm * (tp + tm));
    D2[d] = wp[d] * val[d] + wm[d] * val[d + 4] - (wp[d] + wm[d]) * ui;
  }
  double Dp[2], Dm[2];
  for (int k = 0; k < 2; ++k) {
    Dp[k] = (val[k] - ui) / (th[k] * h);
    Dm[k] = (ui - val[k + 4]) / (th[k + 4] * h);
  }

  double gD2[4] = {0, 0, 0, 0}, gDp[2] = {0, 0}, gDm[2] = {0, 0}, gu = 0;
  auto linear_eval = [&](const Decomp& dc, double* g2, double* gp, double* gm, double& gz) {
    double F = dc.c * ui - dc.f;
    gz = dc.c;
    for (int d = 0; d < 4; ++d) {
      F -= dc.alpha[d] * D2[d];
      g2[d] = -dc.alpha[d];
    }
    for (int k = 0; k < 2; ++k) {
      if (dc.b[k] >= 0) {
        F += dc.b[k] * Dm[k];
        gm[k] = dc.b[k];
        gp[k] = 0;
      } else {
        F += dc.b[k] * Dp[k];
        gp[k] = dc.b[k];
        gm[k] = 0;
      }
    }
    return F;
  };

  double F = 0;
  switch (op_.kind) {
    case OperatorKind::linear:
      F = linear_eval(dec_, gD2, gDp, gDm, gu);
      break;
    case OperatorKind::linear_x:
      F = linear_eval(node_dec_[i], gD2, gDp, gDm, gu);
      break;
    case OperatorKind::bellman: {
      F = -std::numeric_limits<double>::infinity();
      for (const auto& dc : fam_dec_) {
        double a2[4], ap[2], am[2], az;
        const double v = linear_eval(dc, a2, ap, am, az);
        if (v > F) {
          F = v;
          std::copy(a2, a2 + 4, gD2);
          std::copy(ap, ap + 2, gDp);
          std::copy(am, am + 2, gDm);
          gu = az;
        }
      }
      break;
    }
    case OperatorKind::pucci_minus:
    case OperatorKind::pucci_plus: {
      // eigenvalue proxies: largest and smallest directional second difference
      int imax = 0, imin = 0;
      for (int d = 1; d < 4; ++d) {
        if (D2[d] > D2[imax]) imax = d;
        if (D2[d] < D2[imin]) imin = d;
      }
      if (imax == imin) imin = (imax + 1) % 4;
      const double lam = op_.lambda_e, Lam = op_.Lambda_e;
      const bool plus = op_.kind == OperatorKind::pucci_plus;
      // pucci_plus: F = -P^-(M) - f; pucci_minus: F = -P^+(M) - f
      auto weight = [&](double e) { return plus ? (e > 0 ? lam : Lam) : (e > 0 ? Lam : lam); };
      const double w1 = weight(D2[imax]), w2 = weight(D2[imin]);
      F = -(w1 * D2[imax] + w2 * D2[imin]) - op_.f;
      gD2[imax] = -w1;
      gD2[imin] = -w2;
      break;
    }
    case OperatorKind::broken_trace:
      F = D2[0] + D2[1] - op_.f;
      gD2[0] = gD2[1] = 1;
      break;
  }

  if (lin) {
    lin->F = F;
    lin->arm.fill(0.0);
    double diag = gu;
    for (int d = 0; d < 4; ++d) {
      diag -= gD2[d] * (wp[d] + wm[d]);
      lin->arm[d] += gD2[d] * wp[d];
      lin->arm[d + 4] += gD2[d] * wm[d];
    }
    for (int k = 0; k < 2; ++k) {
      const double ip = 1.0 / (th[k] * h), im = 1.0 / (th[k + 4] * h);
      diag += -gDp[k] * ip + gDm[k] * im;
      lin->arm[k] += gDp[k] * ip;
      lin->arm[k + 4] -= gDm[k] * im;
    }
    lin->diag = diag;
  }
  return F;
}

void DiscreteOperator::residual_serial(const std::vector<double>& u, std::vector<double>& out) const {
  const int n = st_->size();
  out.resize(n);
  for (int i = 0; i < n; ++i) out[i] = residual_at(i, u.data());
}

void DiscreteOperator::residual_parallel(const std::vector<double>& u, std::vector<double>& out) const {
  const int n = st_->size();
  out.resize(n);
  const double* up = u.data();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) out[i] = residual_at(i, up);
}

void DiscreteOperator::residual(const std::vector<double>& u, std::vector<double>& out, Exec exec) const {
  if (exec == Exec::serial)
    residual_serial(u, out);
  else
    residual_parallel(u, out);
}

double DiscreteOperator::monotonicity_defect(const std::vector<double>& u) const {
  double worst = 0;
  NodeLin lin;
  for (int i = 0; i < st_->size(); ++i) {
    residual_at(i, u.data(), &lin);
    for (double a : lin.arm) worst = std::max(worst, a);
  }
  return worst;
}

Vec2 stencil_gradient(const Stencil& st, int i, const double* u) {
  const double h = st.grid.h;
  Vec2 g;
  for (int k = 0; k < 2; ++k) {
    const Arm& ap = st.arms[8 * i + k];
    const Arm& am = st.arms[8 * i + k + 4];
    const double up = ap.nbr >= 0 ? u[ap.nbr] : ap.bval;
    const double um = am.nbr >= 0 ? u[am.nbr] : am.bval;
    const double tp = ap.frac, tm = am.frac;
    g[k] = (tm * tm * (up - u[i]) + tp * tp * (u[i] - um)) / (tp * tm * (tp + tm) * h);
  }
  return g;
}

double stencil_second_difference(const Stencil& st, int i, int d, const double* u) {
  const double L = d < 2 ? st.grid.h : kSqrt2 * st.grid.h;
  const Arm& ap = st.arms[8 * i + d];
  const Arm& am = st.arms[8 * i + d + 4];
  const double up = ap.nbr >= 0 ? u[ap.nbr] : ap.bval;
  const double um = am.nbr >= 0 ? u[am.nbr] : am.bval;
  const double tp = ap.frac, tm = am.frac;
  return 2.0 * (tm * up + tp * um - (tp + tm) * u[i]) / (L * L * tp * tm * (tp + tm));
}

}  // namespace gradcon

#include "gradcon/operators.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace gradcon {

const char* to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::linear: return "linear";
    case OperatorKind::linear_x: return "linear_x";
    case OperatorKind::pucci_minus: return "pucci_minus";
    case OperatorKind::pucci_plus: return "pucci_plus";
    case OperatorKind::bellman: return "bellman";
    case OperatorKind::broken_trace: return "broken_trace";
  }
  return "?";
}

namespace {

Vec2 eigenvalues(const Mat2& M) {
  require((M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1 + M.cwiseAbs().maxCoeff()),
          ErrorKind::invalid_argument, "matrix argument must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat2> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double apply_linear(const LinearCoeffs& c, double z, const Vec2& p, const Mat2& M) {
  return -(c.A.cwiseProduct(M)).sum() + c.b.dot(p) + c.c * z - c.f;
}

std::pair<double, double> eig_bounds(const Mat2& A) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(A, Eigen::EigenvaluesOnly);
  return {es.eigenvalues()[0], es.eigenvalues()[1]};
}

}  // namespace

double pucci_minus_value(const Mat2& M, double lambda, double Lambda) {
  const Vec2 e = eigenvalues(M);
  double v = 0;
  for (int i = 0; i < 2; ++i) v += e[i] > 0 ? lambda * e[i] : Lambda * e[i];
  return v;
}

double pucci_plus_value(const Mat2& M, double lambda, double Lambda) {
  const Vec2 e = eigenvalues(M);
  double v = 0;
  for (int i = 0; i < 2; ++i) v += e[i] > 0 ? Lambda * e[i] : lambda * e[i];
  return v;
}

EllipticOperator EllipticOperator::linear(const Mat2& A, const Vec2& b, double c, double f) {
  require((A - A.transpose()).norm() < 1e-14, ErrorKind::invalid_argument, "A must be symmetric");
  require(c >= 0, ErrorKind::invalid_argument, "zeroth-order coefficient must be nonnegative");
  const auto [lo, hi] = eig_bounds(A);
  require(lo > 0, ErrorKind::invalid_argument, "A must be positive definite");
  EllipticOperator op;
  op.kind = OperatorKind::linear;
  op.lin = {A, b, c, f};
  op.lambda_e = lo;
  op.Lambda_e = hi;
  op.f = f;
  return op;
}

EllipticOperator EllipticOperator::linear_x() {
  EllipticOperator op;
  op.kind = OperatorKind::linear_x;
  // Eigenvalues of A(x) stay in [0.75, 2.25] (Gershgorin).
  op.lambda_e = 0.75;
  op.Lambda_e = 2.25;
  return op;
}

EllipticOperator EllipticOperator::pucci_minus(double lambda, double Lambda, double f) {
  require(lambda > 0 && lambda <= Lambda, ErrorKind::invalid_argument, "need 0 < lambda <= Lambda");
  EllipticOperator op;
  op.kind = OperatorKind::pucci_minus;
  op.lambda_e = lambda;
  op.Lambda_e = Lambda;
  op.f = f;
  return op;
}

EllipticOperator EllipticOperator::pucci_plus(double lambda, double Lambda, double f) {
  EllipticOperator op = pucci_minus(lambda, Lambda, f);
  op.kind = OperatorKind::pucci_plus;
  return op;
}

EllipticOperator EllipticOperator::bellman(std::vector<LinearCoeffs> family) {
  require(!family.empty(), ErrorKind::invalid_argument, "bellman needs at least one operator");
  EllipticOperator op;
  op.kind = OperatorKind::bellman;
  op.lambda_e = 1e300;
  op.Lambda_e = 0;
  for (const auto& c : family) {
    const EllipticOperator l = linear(c.A, c.b, c.c, c.f);
    op.lambda_e = std::min(op.lambda_e, l.lambda_e);
    op.Lambda_e = std::max(op.Lambda_e, l.Lambda_e);
  }
  op.family = std::move(family);
  return op;
}

EllipticOperator EllipticOperator::broken_trace(double f) {
  EllipticOperator op;
  op.kind = OperatorKind::broken_trace;
  op.f = f;
  return op;
}

LinearCoeffs EllipticOperator::coefficients_at(const Vec2& x) const {
  if (kind == OperatorKind::linear) return lin;
  require(kind == OperatorKind::linear_x, ErrorKind::invalid_argument, "operator has no linear coefficients");
  LinearCoeffs c;
  const double s = 0.25 * std::sin(x.x() * x.y());
  c.A << 1.5 + 0.5 * std::sin(x.x()), s, s, 1.5 + 0.5 * std::cos(x.y());
  c.b = Vec2(0.3 * std::cos(x.y()), 0.3 * std::sin(x.x()));
  c.c = 0.5 + 0.25 * std::cos(x.x());
  c.f = 1.0 + 0.2 * x.x();
  return c;
}

double EllipticOperator::evaluate(const Vec2& x, double z, const Vec2& p, const Mat2& M) const {
  switch (kind) {
    case OperatorKind::linear:
      eigenvalues(M);
      return apply_linear(lin, z, p, M);
    case OperatorKind::linear_x:
      eigenvalues(M);
      return apply_linear(coefficients_at(x), z, p, M);
    case OperatorKind::pucci_minus:
      return -pucci_plus_value(M, lambda_e, Lambda_e) - f;
    case OperatorKind::pucci_plus:
      return -pucci_minus_value(M, lambda_e, Lambda_e) - f;
    case OperatorKind::bellman: {
      eigenvalues(M);
      double v = -1e300;
      for (const auto& c : family) v = std::max(v, apply_linear(c, z, p, M));
      return v;
    }
    case OperatorKind::broken_trace:
      eigenvalues(M);
      return M.trace() - f;
  }
  return 0;
}

std::string EllipticOperator::describe() const {
  std::ostringstream os;
  os << to_string(kind);
  switch (kind) {
    case OperatorKind::linear:
      os << "(A=[[" << lin.A(0, 0) << "," << lin.A(0, 1) << "],[" << lin.A(1, 0) << "," << lin.A(1, 1) << "]], b=["
         << lin.b.x() << "," << lin.b.y() << "], c=" << lin.c << ", f=" << lin.f << ")";
      break;
    case OperatorKind::pucci_minus:
    case OperatorKind::pucci_plus:
      os << "(lambda=" << lambda_e << ", Lambda=" << Lambda_e << ", f=" << f << ")";
      break;
    case OperatorKind::bellman:
      os << "(" << family.size() << " operators)";
      break;
    case OperatorKind::broken_trace:
      os << "(f=" << f << ")";
      break;
    default:
      break;
  }
  return os.str();
}

AssumptionReport verify_assumptions(const EllipticOperator& op, int probes, unsigned seed) {
  AssumptionReport out;
  Report& rep = out.report;
  rep.title = "operator assumptions";
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N01(0.0, 1.0);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  auto rand_sym = [&](double s) {
    Mat2 B;
    B << N01(rng), N01(rng), N01(rng), N01(rng);
    return Mat2(s * 0.5 * (B + B.transpose()));
  };
  auto rand_psd = [&](double s) {
    Mat2 B;
    B << N01(rng), N01(rng), N01(rng), N01(rng);
    return Mat2(s * B * B.transpose());
  };
  auto rand_vec = [&]() { return Vec2(N01(rng), N01(rng)); };
  const double lam = op.lambda_e, Lam = op.Lambda_e;

  rep.add("ellipticity_constants", lam > 0 && lam <= Lam, lam, 0.0, "0 < lambda_e <= Lambda_e");

  double ell = 0, zmono = 0, convex = 0, lip = 0, pucci_def = 0;
  // Lipschitz constants in p and z, estimated first.
  for (int i = 0; i < probes; ++i) {
    const Vec2 x(U(rng), U(rng));
    const Mat2 M = rand_sym(3);
    const double z = 3 * N01(rng), w = 3 * N01(rng);
    const Vec2 p = rand_vec(), q = rand_vec();
    if ((p - q).norm() > 1e-3)
      out.c4 = std::max(out.c4, std::abs(op.evaluate(x, z, p, M) - op.evaluate(x, z, q, M)) / (p - q).norm());
    if (std::abs(z - w) > 1e-3)
      out.c5 = std::max(out.c5, std::abs(op.evaluate(x, z, p, M) - op.evaluate(x, w, p, M)) / std::abs(z - w));
    const double f0 = op.evaluate(x, z, p, Mat2::Zero());
    if (z != 0) out.c3 = std::max(out.c3, -f0 * (z > 0 ? 1 : -1) / (1 + p.norm()));
  }
  // The sampled ratios only bound c4, c5 from below; use the coefficient
  // bounds of the linear pieces where they are known.
  double c4a = 0, c5a = 0;
  switch (op.kind) {
    case OperatorKind::linear: c4a = op.lin.b.norm(); c5a = op.lin.c; break;
    case OperatorKind::linear_x: c4a = 0.3 * std::sqrt(2.0); c5a = 0.75; break;
    case OperatorKind::bellman:
      for (const auto& c : op.family) {
        c4a = std::max(c4a, c.b.norm());
        c5a = std::max(c5a, c.c);
      }
      break;
    default: break;
  }
  out.c4 = std::max(out.c4, c4a);
  out.c5 = std::max(out.c5, c5a);
  const double tol = 1e-10;
  for (int i = 0; i < probes; ++i) {
    const Vec2 x(U(rng), U(rng));
    const Mat2 M = rand_sym(3), M2 = rand_sym(3), Nn = rand_psd(1);
    const double z = 3 * N01(rng);
    const Vec2 p = rand_vec();
    const double tr = Nn.trace();
    const double dF = op.evaluate(x, z, p, M + Nn) - op.evaluate(x, z, p, M);
    const double v = std::max(-Lam * tr - dF, dF + lam * tr);
    if (v > ell) {
      ell = v;
      if (v > tol && out.witness.empty()) {
        std::ostringstream os;
        os << "N=[[" << Nn(0, 0) << "," << Nn(0, 1) << "],[" << Nn(1, 0) << "," << Nn(1, 1) << "]]";
        out.witness = os.str();
      }
    }
    const double dz = std::abs(N01(rng)) + 1e-3;
    zmono = std::max(zmono, op.evaluate(x, z, p, M) - op.evaluate(x, z + dz, p, M));
    const double mid = op.evaluate(x, z, p, 0.5 * (M + M2));
    convex = std::max(convex, mid - 0.5 * (op.evaluate(x, z, p, M) + op.evaluate(x, z, p, M2)));
    // Sandwich in the orientation consistent with ellipticity: Pucci of N - M.
    const double w = 3 * N01(rng);
    const Vec2 q = rand_vec();
    const double diff = op.evaluate(x, z, p, M) - op.evaluate(x, w, q, M2);
    const double slack = out.c4 * (p - q).norm() + out.c5 * std::abs(z - w);
    const Mat2 D = M2 - M;
    const double lo = pucci_minus_value(D, lam, Lam) - slack, hi = pucci_plus_value(D, lam, Lam) + slack;
    lip = std::max(lip, std::max(lo - diff, diff - hi) / (1 + std::abs(diff)));
    // P^- <= tr(A M) <= P^+ for admissible A.
    Eigen::SelfAdjointEigenSolver<Mat2> es(rand_sym(1));
    std::uniform_real_distribution<double> ev(lam, Lam);
    const Mat2 A = es.eigenvectors() * Vec2(ev(rng), ev(rng)).asDiagonal() * es.eigenvectors().transpose();
    const double t = (A.cwiseProduct(M)).sum();
    pucci_def = std::max(pucci_def, std::max(pucci_minus_value(M, lam, Lam) - t, t - pucci_plus_value(M, lam, Lam)));
  }
  rep.add("uniform_ellipticity", ell <= tol, ell, tol, out.witness);
  rep.add("monotone_in_z", zmono <= tol, zmono, tol);
  rep.add("convex_in_M", convex <= tol, convex, tol);
  rep.add("lipschitz_sandwich", lip <= 1e-9, lip, 1e-9,
          "c4=" + std::to_string(out.c4) + " c5=" + std::to_string(out.c5));
  rep.add("pucci_bounds_trace", pucci_def <= tol, pucci_def, tol);
  if (op.kind != OperatorKind::linear_x) {
    const double f0 = std::abs(op.evaluate(0.0, Vec2::Zero(), Mat2::Zero()));
    const bool zero_source = op.f == 0 && (op.kind != OperatorKind::linear || op.lin.f == 0) &&
                             std::all_of(op.family.begin(), op.family.end(), [](const LinearCoeffs& c) { return c.f == 0; });
    if (zero_source) rep.add("normalization", f0 <= tol, f0, tol);
  }
  return out;
}

}  // namespace gradcon

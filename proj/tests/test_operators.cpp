#include "gradcon/operators.hpp"
#include "gradcon/scheme.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <random>

using namespace gradcon;

namespace {

Mat2 random_sym(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0, 1);
  Mat2 M;
  M << n(rng), n(rng), 0, n(rng);
  M(1, 0) = M(0, 1);
  return M;
}

}  // namespace

TEST_CASE("Pucci operators against eigenvalue sums") {
  std::mt19937_64 rng(1);
  const double l = 0.5, L = 2;
  for (int t = 0; t < 200; ++t) {
    const Mat2 M = random_sym(rng);
    Eigen::SelfAdjointEigenSolver<Mat2> es(M);
    double pos = 0, neg = 0;
    for (int i = 0; i < 2; ++i) (es.eigenvalues()(i) > 0 ? pos : neg) += es.eigenvalues()(i);
    CHECK(pucci_plus_value(M, l, L) == doctest::Approx(L * pos + l * neg).epsilon(1e-12));
    CHECK(pucci_minus_value(M, l, L) == doctest::Approx(l * pos + L * neg).epsilon(1e-12));
    // sign conventions of the operators
    CHECK(EllipticOperator::pucci_plus(l, L, 1).evaluate(0, Vec2::Zero(), M) ==
          doctest::Approx(-pucci_minus_value(M, l, L) - 1));
    CHECK(EllipticOperator::pucci_minus(l, L, 1).evaluate(0, Vec2::Zero(), M) ==
          doctest::Approx(-pucci_plus_value(M, l, L) - 1));
  }
}

TEST_CASE("linear operator formula") {
  Mat2 A;
  A << 2, 0.3, 0.3, 1;
  const auto op = EllipticOperator::linear(A, Vec2(0.5, -1), 0.25, 3);
  Mat2 M;
  M << 1, 2, 2, -1;
  const double v = op.evaluate(2.0, Vec2(1, 1), M);
  CHECK(v == doctest::Approx(-(A * M).trace() + 0.5 - 1 + 0.5 - 3));
}

TEST_CASE("structural assumptions") {
  CHECK(verify_assumptions(EllipticOperator::poisson(1), 300, 1).report.passed());
  CHECK(verify_assumptions(EllipticOperator::pucci_plus(1, 3, 1), 300, 1).report.passed());
  CHECK(verify_assumptions(EllipticOperator::linear_x(), 300, 1).report.passed());
  LinearCoeffs a, b;
  b.A << 0.5, 0, 0, 1;
  CHECK(verify_assumptions(EllipticOperator::bellman({a, b}), 300, 1).report.passed());
  const AssumptionReport broken = verify_assumptions(EllipticOperator::broken_trace(1), 300, 1);
  CHECK_FALSE(broken.report.passed());
  CHECK_FALSE(broken.witness.empty());
}

TEST_CASE("discrete operator is exact on quadratics away from the boundary") {
  const Domain2D d = Domain2D::disc(1);
  const Grid2D g = make_grid(d, 1.0 / 16, 2);
  Mat2 Q;
  Q << 1.0, 0.4, 0.4, -0.5;
  auto quad = [&](const Vec2& x) { return 0.5 * x.dot(Q * x) + 0.3 * x.x(); };
  const Stencil st = stencil_on_domain(g, d, quad);
  std::vector<double> u(st.size());
  for (int i = 0; i < st.size(); ++i) u[i] = quad(g.node(st.nodes[i]));
  Mat2 A;
  A << 1.0, 0.3, 0.3, 0.8;
  for (const auto& op : {EllipticOperator::linear(A, Vec2::Zero(), 0, 1), EllipticOperator::pucci_plus(1, 2, 0.5)}) {
    const DiscreteOperator D(op, st);
    std::vector<double> F;
    D.residual(u, F, Exec::serial);
    for (int i = 0; i < st.size(); ++i) {
      const Vec2 x = g.node(st.nodes[i]);
      const double exact = op.evaluate(x, u[i], Q * x + Vec2(0.3, 0), Q);
      if (op.kind == OperatorKind::linear) CHECK(F[i] == doctest::Approx(exact).epsilon(1e-9));
    }
    CHECK(D.monotonicity_defect(u) <= 0);
  }
}

TEST_CASE("serial and parallel residuals agree; the broken operator is not monotone") {
  const Domain2D d = Domain2D::disc(1);
  const Grid2D g = make_grid(d, 1.0 / 16, 2);
  const Stencil st = stencil_on_domain(g, d, [](const Vec2&) { return 0.0; });
  std::vector<double> u(st.size());
  for (int i = 0; i < st.size(); ++i) u[i] = std::sin(3 * g.node(st.nodes[i]).x());
  const DiscreteOperator D(EllipticOperator::pucci_minus(1, 2, 1), st);
  std::vector<double> a, b;
  D.residual_serial(u, a);
  D.residual_parallel(u, b);
  CHECK(a == b);
  const DiscreteOperator B(EllipticOperator::broken_trace(1), st);
  CHECK(B.monotonicity_defect(u) > 0);
}

#pragma once

#include "gradcon/types.hpp"

#include <string>
#include <vector>

namespace gradcon {

enum class OperatorKind { linear, linear_x, pucci_minus, pucci_plus, bellman, broken_trace };

const char* to_string(OperatorKind k);

// -tr(A M) + b.p + c z - f
struct LinearCoeffs {
  Mat2 A = Mat2::Identity();
  Vec2 b = Vec2::Zero();
  double c = 0.0;
  double f = 0.0;
};

// F(x, z, p, M), decreasing in M. Sign conventions:
//   pucci_minus: F = P^-(-M) - f = -P^+(M) - f   (concave in M)
//   pucci_plus:  F = P^+(-M) - f = -P^-(M) - f   (convex in M)
//   bellman:     F = max_l linear_l
//   linear_x:    smooth x-dependent coefficients (fixed preset)
//   broken_trace: F = +tr M - f, violates ellipticity on purpose
struct EllipticOperator {
  OperatorKind kind = OperatorKind::linear;
  LinearCoeffs lin;
  std::vector<LinearCoeffs> family;
  double lambda_e = 1.0, Lambda_e = 1.0;
  double f = 0.0;

  static EllipticOperator linear(const Mat2& A, const Vec2& b, double c, double f);
  static EllipticOperator poisson(double f) { return linear(Mat2::Identity(), Vec2::Zero(), 0.0, f); }
  static EllipticOperator linear_x();
  static EllipticOperator pucci_minus(double lambda, double Lambda, double f);
  static EllipticOperator pucci_plus(double lambda, double Lambda, double f);
  static EllipticOperator bellman(std::vector<LinearCoeffs> family);
  static EllipticOperator broken_trace(double f);

  bool depends_on_x() const { return kind == OperatorKind::linear_x; }
  // Coefficients of the linear kinds at x.
  LinearCoeffs coefficients_at(const Vec2& x) const;

  double evaluate(const Vec2& x, double z, const Vec2& p, const Mat2& M) const;
  double evaluate(double z, const Vec2& p, const Mat2& M) const { return evaluate(Vec2::Zero(), z, p, M); }
  std::string describe() const;
};

// Pucci extremal operators via eigenvalues.
double pucci_minus_value(const Mat2& M, double lambda, double Lambda);
double pucci_plus_value(const Mat2& M, double lambda, double Lambda);

struct AssumptionReport {
  double c4 = 0, c5 = 0, c3 = 0;
  std::string witness;  // first ellipticity counterexample, if any
  Report report;
};

AssumptionReport verify_assumptions(const EllipticOperator& op, int probes, unsigned seed);

}  // namespace gradcon

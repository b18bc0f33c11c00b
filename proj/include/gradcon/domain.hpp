#pragma once

#include "gradcon/convex_body.hpp"
#include "gradcon/types.hpp"

#include <string>
#include <vector>

namespace gradcon {

enum class DomainKind { disc, ellipse, rounded_rectangle, star };

struct BoundarySample {
  double param = 0.0;  // curve parameter in [0, 2pi)
  Vec2 point;
  Vec2 tangent;  // unit, counterclockwise
  Vec2 normal;   // unit, inward
  double curvature = 0.0;
  double arclength = 0.0;
};

struct DistanceResult {
  double d = 0.0;
  Vec2 foot;
  double param = 0.0;
};

// Bounded open set with a closed C^2 boundary curve P(t), t in [0, 2pi),
// traversed counterclockwise.
class Domain2D {
 public:
  static Domain2D disc(double R);
  static Domain2D ellipse(double a, double b);
  // Full width and height, corner radius r.
  static Domain2D rounded_rectangle(double w, double h, double r);
  // r(theta) = r0 (1 + amp cos(m theta)).
  static Domain2D star(double r0, double amp, int m);

  DomainKind kind() const { return kind_; }
  std::string describe() const;

  Vec2 point(double t) const;
  Vec2 d1(double t) const;
  Vec2 d2(double t) const;
  BoundarySample at(double t) const;

  bool contains(const Vec2& x) const;
  double perimeter() const { return perimeter_; }
  double arclength(double t) const;
  // Parameter at arclength s (s taken modulo the perimeter).
  double param_at_arclength(double s) const;

  std::vector<BoundarySample> sample(int n) const;
  // Sample count for a solver grid of spacing h (proportional to arclength / h, >= 512).
  int recommended_samples(double h) const;

  // Nearest boundary point for any x in the plane.
  DistanceResult project(const Vec2& x) const;
  // As project, but x must lie in the closure of U.
  DistanceResult euclidean_distance(const Vec2& x) const;
  // Signed distance, positive inside.
  double signed_distance(const Vec2& x) const;

  Mat2 boundary_hessian_of_distance(const Vec2& y) const;

  Vec2 bbox_min() const { return bmin_; }
  Vec2 bbox_max() const { return bmax_; }
  double param_a() const { return a_; }
  double param_b() const { return b_; }
  double param_c() const { return c_; }
  int param_m() const { return m_; }

 private:
  Domain2D() = default;
  void finish();
  double speed(double t) const { return d1(t).norm(); }

  DomainKind kind_ = DomainKind::disc;
  double a_ = 1, b_ = 1, c_ = 0;
  int m_ = 0;
  double perimeter_ = 0;
  Vec2 bmin_, bmax_;
  // cumulative arclength at uniform parameters (for non-closed-form kinds)
  std::vector<double> cum_;
};

enum class DatumKind { zero, affine, quadratic };

// phi(x) = 0.5 x^T Q x + c.x + c0 with exact derivatives.
struct BoundaryDatum {
  DatumKind kind = DatumKind::zero;
  Mat2 Q = Mat2::Zero();
  Vec2 c = Vec2::Zero();
  double c0 = 0.0;

  static BoundaryDatum zero() { return {}; }
  static BoundaryDatum affine(const Vec2& c, double c0 = 0.0) {
    BoundaryDatum d;
    d.kind = DatumKind::affine;
    d.c = c;
    d.c0 = c0;
    return d;
  }
  static BoundaryDatum quadratic(const Mat2& Q, const Vec2& c, double c0 = 0.0) {
    BoundaryDatum d;
    d.kind = DatumKind::quadratic;
    d.Q = 0.5 * (Q + Q.transpose());
    d.c = c;
    d.c0 = c0;
    return d;
  }
  BoundaryDatum negated() const {
    BoundaryDatum d = *this;
    d.Q = -Q;
    d.c = -c;
    d.c0 = -c0;
    return d;
  }
  double value(const Vec2& x) const { return 0.5 * x.dot(Q * x) + c.dot(x) + c0; }
  Vec2 gradient(const Vec2& x) const { return Q * x + c; }
  Mat2 hessian(const Vec2&) const { return Q; }
  std::string describe() const;
};

// Compatibility phi(y) - phi(z) <= gamma(y - z) on random boundary pairs, and
// the largest polar gauge of Dphi over the boundary samples.
Report check_datum(const Domain2D& dom, const BoundaryDatum& phi, const ConvexBody& K, int n_samples,
                   int n_pairs, unsigned seed, bool require_strict);

struct ConditionStarReport {
  bool passed = true;
  double max_polar_gauge = 0.0;
  std::vector<int> saturated;  // samples with gamma°(Dphi) = 1
  std::vector<int> failing;    // saturated samples violating transversality
  Report report;
};

ConditionStarReport check_condition_star(const std::vector<BoundarySample>& samples, const BoundaryDatum& phi,
                                         const ConvexBody& K, double tol = 1e-9);

}  // namespace gradcon

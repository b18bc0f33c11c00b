#pragma once

#include "gradcon/types.hpp"

#include <memory>
#include <span>
#include <vector>

namespace gradcon {

enum class BodyKind { ball, ellipse, polygon, p_ball, smoothed };

const char* to_string(BodyKind k);

struct GaugeEval {
  double value = 0.0;
  bool has_gradient = false;
  bool has_hessian = false;
  VecX gradient;
  MatX hessian;
  // Filled instead of gradient at corners of a polygonal gauge.
  std::vector<VecX> subdifferential_extremes;
};

struct NormalCone {
  VecX base_point;
  std::vector<VecX> generators;
};

struct CauchySchwarz {
  double lhs = 0.0;
  double rhs = 0.0;
  VecX witness_direction;
};

class SupportTable;

// Compact convex set with 0 in its interior. Immutable; cheap to copy.
class ConvexBody {
 public:
  static ConvexBody ball(double r, int dim = 2);
  static ConvexBody ellipse(std::vector<double> semi_axes);
  static ConvexBody polygon(std::vector<Vec2> vertices_ccw);
  // {x : |x|_p <= scale}, 1 < p < inf.
  static ConvexBody p_ball(double p, double scale, int dim = 2);

  BodyKind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool is_smooth() const { return kind_ != BodyKind::polygon; }

  double gauge(std::span<const double> x) const;
  double gauge(const Vec2& x) const { return gauge2(x.x(), x.y()); }
  double gauge(const VecX& x) const { return gauge(std::span<const double>(x.data(), x.size())); }
  // Allocation-free 2D path used by the grid kernels.
  double gauge2(double x, double y) const;

  GaugeEval derivatives(const VecX& x) const;
  GaugeEval derivatives(const Vec2& x) const { return derivatives(VecX(x)); }

  // Fast 2D gradient/hessian for smooth kinds; throws on polygons.
  Vec2 gradient2(const Vec2& x) const;
  Mat2 hessian2(const Vec2& x) const;

  ConvexBody polar() const;
  ConvexBody negated() const;

  // Shrinking smooth strictly convex outer approximation of this body
  // (meant for the polar constraint set).
  ConvexBody smooth_approximation(int k) const;

  NormalCone normal_cone(const VecX& x) const;

  // Largest / smallest |x| over the body; gauge(x) lies in [|x|/R, |x|/r].
  double max_radius() const;
  double inner_radius() const;
  // Lipschitz constant of the gauge, i.e. 1 / inner_radius.
  double lipschitz() const { return 1.0 / inner_radius(); }

  // Boundary points sampled at n equally spaced direction angles (2D only).
  std::vector<Vec2> boundary_samples(int n) const;

  // Accessors
  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<Vec2>& facet_normals() const { return normals_; }
  const std::vector<double>& facet_offsets() const { return offsets_; }
  const std::vector<double>& semi_axes() const { return axes_; }
  double exponent() const { return p_; }
  double scale() const { return scale_; }
  int level() const { return level_; }
  bool dual_form() const { return dual_; }
  const SupportTable* table() const { return table_.get(); }

  // Smoothed kinds: support function of the underlying set and
  // its radius of curvature h + h'' at direction angle theta.
  double support_curvature_radius(double theta) const;

 private:
  ConvexBody() = default;
  double smoothed_support_gauge(double x, double y, double* theta_star) const;

  BodyKind kind_ = BodyKind::ball;
  int dim_ = 2;
  double r_ = 1.0;
  std::vector<double> axes_;
  std::vector<Vec2> vertices_;
  std::vector<Vec2> normals_;
  std::vector<double> offsets_;
  double p_ = 2.0;
  double scale_ = 1.0;
  // smoothed
  std::shared_ptr<const SupportTable> table_;
  int level_ = 0;
  bool dual_ = false;
  bool mirrored_ = false;
};

CauchySchwarz cauchy_schwarz_check(const ConvexBody& body, const VecX& x, const VecX& y);

}  // namespace gradcon

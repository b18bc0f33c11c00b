#pragma once

#include "gradcon/convex_body.hpp"
#include "gradcon/domain.hpp"
#include "gradcon/grid.hpp"
#include "gradcon/kernels.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace gradcon {

enum class ObstacleSide { upper, lower };

struct ObstacleOptions {
  int n_boundary = 0;    // 0: domain.recommended_samples(h)
  bool refine = true;    // continuous minimization around the best sample
  bool derivatives = true;
  Exec exec = Exec::parallel;
};

// Boundary quantities along one characteristic.
struct BoundaryJet {
  bool valid = false;
  double lambda = 0;
  Vec2 mu;
  Vec2 a;     // D gamma°(mu): characteristic direction
  Mat2 d2rho; // D^2 rho(y)
  Mat2 G;     // D^2 gamma°(mu)
  Mat2 W;     // -G d2rho
  double caustic_depth = 0;  // first positive zero of det(I - tW), inf if none
};

struct ClosestPointResult {
  std::vector<int> minimizers;
  double value = 0;
  bool is_multiple = false;
  double param = 0;  // refined curve parameter of the best minimizer
};

struct InteriorHessian {
  Mat2 d2rho;
  double detQ = 0;
  double depth = 0;  // rho(x) - phi(y)
  Vec2 foot;
  double characteristic_residual = 0;  // |x - (y + depth a)|
};

// rho_{K,phi}(x) = min_y gamma_K(x - y) + phi(y) and its lower companion.
// The lower field stores -rho_bar, with rho_bar = rho_{-K,-phi}.
struct ObstacleField {
  ObstacleSide side = ObstacleSide::upper;
  Grid2D grid;
  Domain2D domain = Domain2D::disc(1);
  ConvexBody K = ConvexBody::ball(1);       // body of the envelope (K or -K)
  ConvexBody Kpolar = ConvexBody::ball(1);  // its polar
  BoundaryDatum phi;                        // datum of the envelope (phi or -phi)
  double spacing = 0;                       // max boundary sample spacing
  double tie = 0;

  std::vector<BoundarySample> samples;
  std::vector<double> phi_samples;

  std::vector<double> envelope;  // rho_{K,phi} at every node
  std::vector<double> values;    // rho (upper) or -rho_bar (lower)
  std::vector<int> closest;      // best sample index per node
  std::vector<double> closest_param;
  std::vector<std::uint8_t> multiple;

  bool smooth = false;
  std::vector<BoundaryJet> jets;  // per sample when smooth
  std::vector<double> detQ;       // per node (NaN where not computed)
  std::vector<std::uint8_t> ridge;
  double ridge_boundary_distance = 0;  // min distance from ridge cells to the boundary

  double sign() const { return side == ObstacleSide::upper ? 1.0 : -1.0; }
  double envelope_at(const Vec2& x) const;  // continuous, refined
  ClosestPointResult closest_points(const Vec2& x) const;
};

ObstacleField build_obstacle(const Domain2D& dom, const ConvexBody& K, const BoundaryDatum& phi, const Grid2D& grid,
                             ObstacleSide side, const ObstacleOptions& opt = {});

// lambda(y) solving gamma°(Dphi + lambda nu) = 1 and mu = Dphi + lambda nu.
struct LambdaMu {
  double lambda = 0;
  Vec2 mu;
};
LambdaMu lambda_mu(const ConvexBody& Kpolar, const BoundaryDatum& phi, const BoundarySample& y);

Mat2 d2rho_at_boundary(const ConvexBody& Kpolar, const BoundaryDatum& phi, const BoundarySample& y);
BoundaryJet boundary_jet(const ConvexBody& Kpolar, const BoundaryDatum& phi, const BoundarySample& y);

InteriorHessian d2rho_interior(const ObstacleField& f, const Vec2& x, double det_tol = 1e-10);

struct MonotonicityReport {
  int probes = 0;
  int violations = 0;
  double max_violation = 0;
  double riccati_max_qdot = 0;  // should be <= 0
  double riccati_mismatch = 0;  // RK4 vs closed form
  Report report;
};

MonotonicityReport monotonicity_check(const ObstacleField& f, int probes, unsigned seed, double tol = 1e-6);

}  // namespace gradcon

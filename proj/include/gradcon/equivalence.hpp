#pragma once

#include "gradcon/obstacle.hpp"
#include "gradcon/penalty.hpp"

#include <cstdint>
#include <vector>

namespace gradcon {

struct CoincidenceDecomposition {
  Grid2D grid;
  std::vector<std::uint8_t> E, P_plus, P_minus;  // partition of the interior nodes
  std::vector<int> free_boundary;                // lower-left node of cells touching both E and P
  double tol_p = 0;

  // Nodes within `width` cells (max norm) of a free-boundary cell.
  std::vector<std::uint8_t> band(int width) const;
};

// max(1e-8, 5 h^2 S) with S the largest boundary |D^2 rho| of either field.
double coincidence_tolerance(const ObstacleField& upper, const ObstacleField& lower);

CoincidenceDecomposition decompose(const DoubleObstacleResult& res, const ObstacleField& upper,
                                   const ObstacleField& lower, double tol_p);

struct GradientConstraintReport {
  std::vector<double> H;  // gamma°(D_h u) - 1, NaN outside U
  double max_violation = 0;
  std::vector<std::uint8_t> active;  // |H| <= tol
  Report report;
};

// gamma°(D_h u) - 1 at the unknowns of the solve; `Kpolar` is the constraint set.
GradientConstraintReport gradient_constraint(const DoubleObstacleResult& res, const ConvexBody& Kpolar, double tol);

// max{F_h[u], H(D_h u)} in [-tol_c, tol_c] outside a 2-cell free-boundary band,
// gamma°(D_h u) <= 1 + tol_c everywhere, and a direction-fan bound D_xi u <= 1.
Report check_theorem2(const DoubleObstacleResult& res, const CoincidenceDecomposition& dec, const ConvexBody& K,
                      int band_width = 2);

// P = {H = 0} and E = {H < 0}, up to a band. tol_H is the tolerance on |H|.
Report check_prop_3_5(const DoubleObstacleResult& res, const CoincidenceDecomposition& dec, const ConvexBody& K,
                      double tol_H, int band_width = 2);

Report check_prop_3_3(const CoincidenceDecomposition& dec, const ObstacleField& upper, const ObstacleField& lower);

// Segments from coincidence nodes to their closest boundary points stay in the coincidence set.
Report check_lemma_3_2(const DoubleObstacleResult& res, const CoincidenceDecomposition& dec, const ObstacleField& upper,
                       const ObstacleField& lower, int max_nodes = 400);

struct RadiusFit {
  double mean = 0, stddev = 0;
  int edges = 0;
};
// Free boundary between the elastic set and P+ from the solver's active set,
// located at midpoints of grid edges joining the two classes.
RadiusFit fit_free_boundary_radius(const DoubleObstacleResult& res, const Vec2& center);

// Max over nodes whose 8 arms are all uncut and directions of |second difference|.
double max_second_difference(const DoubleObstacleResult& res);

struct PipelineLevel {
  int k = 0;
  double sup_F = 0;
  double max_d2 = 0;
  double cauchy = 0;  // sup |u_k - u_{k-1}|, 0 for the first level
  double rho_increase = 0;  // max (rho_k - rho_{k-1})^+
  int plastic_nodes = 0;
};

struct PipelineResult {
  std::vector<PipelineLevel> levels;
  std::vector<double> u_last;
  double refinement_ratio = 0;  // max_d2(h/2) / max_d2(h) at the last level, 0 if not run
  Report report;
};

struct PipelineOptions {
  std::vector<int> levels{4, 8, 16, 32};
  double h = 1.0 / 32;
  bool refine = true;  // repeat the last level at h/2
  PenaltyConfig solver;
};

PipelineResult run_approximation_pipeline(const EllipticOperator& op, const Domain2D& dom, const BoundaryDatum& phi,
                                          const ConvexBody& Kpolar, const PipelineOptions& opt);

}  // namespace gradcon

#pragma once

#include "gradcon/domain.hpp"
#include "gradcon/grid.hpp"
#include "gradcon/kernels.hpp"
#include "gradcon/obstacle.hpp"
#include "gradcon/operators.hpp"
#include "gradcon/scheme.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace gradcon {

// beta_delta: 0 on (-inf, 0], t/delta on [delta, inf), 2s^2 - s^3 (s = t/delta) between.
struct BetaValue {
  double value = 0, derivative = 0;
};
BetaValue beta(double delta, double t);

// Upper and lower obstacles on a grid, defined at every node.
struct ObstaclePair {
  Grid2D grid;
  std::vector<double> plus, minus;
  std::vector<std::uint8_t> inside;  // node in U
  std::vector<double> dist;          // unsigned distance to the boundary
  double C1 = 1.0;                   // Lipschitz constant of both obstacles
};

ObstaclePair make_obstacle_pair(const ObstacleField& upper, const ObstacleField& lower, const Domain2D& dom,
                                double C1);
ObstaclePair make_obstacle_pair(const Grid2D& g, const Domain2D& dom, const std::function<double(const Vec2&)>& plus,
                                const std::function<double(const Vec2&)>& minus, double C1);

struct MollifiedObstacles {
  Grid2D grid;
  double epsilon = 0, delta_eps = 0, C1 = 0, C2 = 0;
  std::vector<double> psi_plus_eps, psi_minus_eps;  // NaN where the kernel leaves the grid
  std::vector<std::uint8_t> U_eps;
  Report report;  // preconditions and invariants
};

// C2 <= 0: estimate it from the second differences of the obstacles.
MollifiedObstacles mollify_obstacles(const ObstaclePair& obs, double epsilon, double C2 = -1.0,
                                     Exec exec = Exec::parallel);

struct NewtonConfig {
  int max_iters = 80;
  double residual_tol = 1e-8;
  double armijo = 1e-4;
  double step_floor = 1.0 / 1048576.0;  // 2^-20
};

struct PenaltyConfig {
  std::vector<double> epsilons;  // strictly decreasing; empty: {3h}
  double delta0 = 1.0;
  double delta = 1.0 / 256.0;  // final penalty scale, reached by halving from delta0
  NewtonConfig newton;
  bool final_complementarity = true;
  int howard_max_iters = 200;
  Exec exec = Exec::parallel;
  void validate() const;
};

struct LogRow {
  std::string stage;
  int iter = 0;
  double residual = 0, violation_plus = 0, violation_minus = 0;
};

struct PenaltyLevel {
  double delta = 0;
  int newton_iters = 0;
  double residual = 0;
  double violation_plus = 0;   // sup (u - psi_eps^+)^+
  double violation_minus = 0;  // sup (psi_eps^- - u)^+
  double C = 0;                // sup of the penalty terms
};

class NonconvergenceError : public Error {
 public:
  NonconvergenceError(const std::string& what, std::vector<double> history, std::vector<double> last)
      : Error(ErrorKind::nonconvergence, what), history_(std::move(history)), last_(std::move(last)) {}
  const std::vector<double>& history() const { return history_; }
  const std::vector<double>& last_iterate() const { return last_; }

 private:
  std::vector<double> history_, last_;
};

struct PenaltyResult {
  std::vector<double> u;  // grid-sized, NaN outside U_eps
  std::vector<PenaltyLevel> levels;
  std::vector<LogRow> log;
  Report report;
};

// Penalized equation on U_eps with Dirichlet data psi_eps^+ on its boundary,
// continued in delta from cfg.delta0 down to cfg.delta.
PenaltyResult solve_penalized(const EllipticOperator& op, const MollifiedObstacles& mo, const PenaltyConfig& cfg,
                              const std::vector<double>* warm = nullptr);

enum NodeClass : std::uint8_t { kOutside = 0, kElastic = 1, kPlasticPlus = 2, kPlasticMinus = 3 };

struct DoubleObstacleResult {
  Grid2D grid;
  std::shared_ptr<const Stencil> stencil;  // unknowns = grid nodes in U
  std::vector<double> u;                   // grid-sized, NaN outside U
  std::vector<double> Fh;                  // F_h[u], NaN outside U
  std::vector<std::uint8_t> cls;           // NodeClass from the final active set
  std::vector<std::uint8_t> extended;      // nodes of U outside U_eps filled by extension
  double sup_F = 0, tol_c = 0, complementarity = 0;
  std::vector<PenaltyResult> stages;
  std::vector<MollifiedObstacles> mollified;
  std::vector<LogRow> log;
  Report report;
};

DoubleObstacleResult solve_double_obstacle(const EllipticOperator& op, const ObstaclePair& obs, const Domain2D& dom,
                                           const BoundaryDatum& phi, const PenaltyConfig& cfg);

// Rebuilds the certification quantities (F_h, classes, complementarity) of a
// stored solution without solving.
DoubleObstacleResult certify_solution(const EllipticOperator& op, const ObstaclePair& obs, const Domain2D& dom,
                                      const BoundaryDatum& phi, const std::vector<double>& u_grid);

// Comparison: v (grid-sized) must be a discrete subsolution; nodes
// where that fails are excluded and counted. Asserts v <= u + tol elsewhere.
Report comparison_check(const DoubleObstacleResult& res, const std::vector<double>& v, const EllipticOperator& op,
                        const ObstaclePair& obs, double tol = 1e-8, double sub_tol = 1e-8);

}  // namespace gradcon

#pragma once

#include "gradcon/domain.hpp"
#include "gradcon/grid.hpp"
#include "gradcon/kernels.hpp"
#include "gradcon/operators.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

namespace gradcon {

// One of the 8 arms of a node: neighbour at distance frac * |dir| * h, either
// another unknown (nbr >= 0) or a Dirichlet value.
struct Arm {
  double frac = 1.0;
  int nbr = -1;
  double bval = 0.0;
};

struct Stencil {
  Grid2D grid;
  std::vector<int> nodes;    // grid index of each unknown
  std::vector<int> unknown;  // grid index -> unknown index or -1
  std::vector<Arm> arms;     // 8 per unknown, direction order of kDirI/kDirJ

  int size() const { return static_cast<int>(nodes.size()); }
  const Arm& arm(int i, int d) const { return arms[8 * i + d]; }
};

// Unknowns at grid nodes inside the domain; arms crossing the boundary are
// cut at the crossing (Shortley-Weller) and carry g at the crossing point.
Stencil stencil_on_domain(const Grid2D& g, const Domain2D& dom, const std::function<double(const Vec2&)>& g_bc);

// Unknowns at nodes with in_set != 0; arms to outside nodes keep full length
// and take dirichlet[node].
Stencil stencil_on_set(const Grid2D& g, const std::vector<std::uint8_t>& in_set, const std::vector<double>& dirichlet);

// Nonuniform 3-point gradient and 2-point second difference along direction
// d (0..3) at unknown i; cut arms use their Dirichlet values.
Vec2 stencil_gradient(const Stencil& st, int i, const double* u);
double stencil_second_difference(const Stencil& st, int i, int d, const double* u);

// Derivatives of the node residual with respect to the centre value and the
// 8 arm values.
struct NodeLin {
  double F = 0;
  double diag = 0;
  std::array<double, 8> arm{};
};

// Monotone finite-difference discretization F_h of an elliptic operator on a
// stencil: upwind first differences, 2-point second differences along the
// axes and both diagonals.
class DiscreteOperator {
 public:
  DiscreteOperator(const EllipticOperator& op, const Stencil& st);

  const Stencil& stencil() const { return *st_; }
  const EllipticOperator& op() const { return op_; }

  double residual_at(int i, const double* u, NodeLin* lin = nullptr) const;
  void residual(const std::vector<double>& u, std::vector<double>& out, Exec exec = Exec::parallel) const;
  void residual_serial(const std::vector<double>& u, std::vector<double>& out) const;
  void residual_parallel(const std::vector<double>& u, std::vector<double>& out) const;

  // Largest positive off-diagonal coefficient seen by the last linearization
  // probe; > 0 means the scheme is not monotone.
  double monotonicity_defect(const std::vector<double>& u) const;

  Vec2 gradient(int i, const double* u) const { return stencil_gradient(*st_, i, u); }
  double second_difference(int i, int d, const double* u) const { return stencil_second_difference(*st_, i, d, u); }

 private:
  struct Decomp {
    std::array<double, 4> alpha{};  // weights on the four second differences
    Vec2 b = Vec2::Zero();
    double c = 0, f = 0;
  };
  static Decomp decompose(const LinearCoeffs& lc);

  EllipticOperator op_;
  const Stencil* st_;
  std::vector<Decomp> node_dec_;  // linear_x, per unknown
  Decomp dec_;                    // linear
  std::vector<Decomp> fam_dec_;   // bellman
};

}  // namespace gradcon

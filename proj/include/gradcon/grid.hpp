#pragma once

#include "gradcon/domain.hpp"
#include "gradcon/types.hpp"

#include <cstdint>
#include <vector>

namespace gradcon {

struct Grid2D {
  int nx = 0, ny = 0;
  double x0 = 0, y0 = 0, h = 0;

  int size() const { return nx * ny; }
  int index(int i, int j) const { return j * nx + i; }
  int ix(int k) const { return k % nx; }
  int jy(int k) const { return k / nx; }
  Vec2 node(int i, int j) const { return {x0 + i * h, y0 + j * h}; }
  Vec2 node(int k) const { return node(ix(k), jy(k)); }
  bool in_range(int i, int j) const { return i >= 0 && j >= 0 && i < nx && j < ny; }
  bool same(const Grid2D& o) const {
    return nx == o.nx && ny == o.ny && x0 == o.x0 && y0 == o.y0 && h == o.h;
  }
};

// Grid aligned so that the origin is a node, covering the bounding box of
// the domain plus `margin` cells on every side.
Grid2D make_grid(const Domain2D& dom, double h, int margin);

enum NodeMask : std::uint8_t { kExterior = 0, kInterior = 1, kBand = 2 };

struct GridField {
  Grid2D grid;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;

  double& operator[](int k) { return values[k]; }
  double operator[](int k) const { return values[k]; }
  double at(int i, int j) const { return values[grid.index(i, j)]; }
  bool interior(int k) const { return mask[k] == kInterior; }

  // Centered first differences and 2-point second differences along
  // (di, dj) with step |(di, dj)| h. Require all involved nodes to exist.
  Vec2 gradient_central(int k) const;
  double second_difference(int k, int di, int dj) const;
};

// Masks: interior nodes lie in U; band nodes lie outside U but touch an
// interior node through one of the 8 neighbours.
std::vector<std::uint8_t> domain_mask(const Grid2D& g, const Domain2D& dom);

GridField make_field(const Grid2D& g, const std::vector<std::uint8_t>& mask, double fill = 0.0);

// Euclidean signed distance to the boundary at every node (positive inside).
std::vector<double> distance_field(const Grid2D& g, const Domain2D& dom);

// Bilinear interpolation; x must lie inside the grid rectangle.
double interpolate(const Grid2D& g, const std::vector<double>& v, const Vec2& x);

// The 8 stencil directions: e1, e2, the two diagonals, then their negatives.
inline constexpr int kDirI[8] = {1, 0, 1, -1, -1, 0, -1, 1};
inline constexpr int kDirJ[8] = {0, 1, 1, 1, 0, -1, -1, -1};

}  // namespace gradcon

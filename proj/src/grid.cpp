#include "gradcon/grid.hpp"

#include <algorithm>
#include <cmath>

namespace gradcon {

Grid2D make_grid(const Domain2D& dom, double h, int margin) {
  require(h > 0, ErrorKind::invalid_argument, "grid spacing must be positive");
  require(margin >= 2, ErrorKind::invalid_argument, "grid margin must be at least 2 cells");
  const Vec2 lo = dom.bbox_min(), hi = dom.bbox_max();
  const int i0 = static_cast<int>(std::floor(lo.x() / h)) - margin;
  const int i1 = static_cast<int>(std::ceil(hi.x() / h)) + margin;
  const int j0 = static_cast<int>(std::floor(lo.y() / h)) - margin;
  const int j1 = static_cast<int>(std::ceil(hi.y() / h)) + margin;
  Grid2D g;
  g.h = h;
  g.x0 = i0 * h;
  g.y0 = j0 * h;
  g.nx = i1 - i0 + 1;
  g.ny = j1 - j0 + 1;
  return g;
}

std::vector<std::uint8_t> domain_mask(const Grid2D& g, const Domain2D& dom) {
  std::vector<std::uint8_t> m(g.size(), kExterior);
  for (int k = 0; k < g.size(); ++k)
    if (dom.contains(g.node(k))) m[k] = kInterior;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int k = g.index(i, j);
      if (m[k] != kExterior) continue;
      for (int d = 0; d < 8; ++d) {
        const int a = i + kDirI[d], b = j + kDirJ[d];
        if (g.in_range(a, b) && m[g.index(a, b)] == kInterior) {
          m[k] = kBand;
          break;
        }
      }
    }
  return m;
}

GridField make_field(const Grid2D& g, const std::vector<std::uint8_t>& mask, double fill) {
  GridField f;
  f.grid = g;
  f.values.assign(g.size(), fill);
  f.mask = mask;
  return f;
}

Vec2 GridField::gradient_central(int k) const {
  const int i = grid.ix(k), j = grid.jy(k);
  require(i > 0 && j > 0 && i + 1 < grid.nx && j + 1 < grid.ny, ErrorKind::invalid_argument,
          "central difference needs all four neighbours");
  return {(at(i + 1, j) - at(i - 1, j)) / (2 * grid.h), (at(i, j + 1) - at(i, j - 1)) / (2 * grid.h)};
}

double GridField::second_difference(int k, int di, int dj) const {
  const int i = grid.ix(k), j = grid.jy(k);
  require(grid.in_range(i + di, j + dj) && grid.in_range(i - di, j - dj), ErrorKind::invalid_argument,
          "second difference leaves the grid");
  const double s2 = (di * di + dj * dj) * grid.h * grid.h;
  return (at(i + di, j + dj) - 2 * values[k] + at(i - di, j - dj)) / s2;
}

std::vector<double> distance_field(const Grid2D& g, const Domain2D& dom) {
  std::vector<double> d(g.size());
#pragma omp parallel for schedule(static)
  for (int k = 0; k < g.size(); ++k) d[k] = dom.signed_distance(g.node(k));
  return d;
}

double interpolate(const Grid2D& g, const std::vector<double>& v, const Vec2& x) {
  const double fx = (x.x() - g.x0) / g.h, fy = (x.y() - g.y0) / g.h;
  int i = static_cast<int>(std::floor(fx)), j = static_cast<int>(std::floor(fy));
  i = std::clamp(i, 0, g.nx - 2);
  j = std::clamp(j, 0, g.ny - 2);
  const double s = fx - i, t = fy - j;
  return (1 - s) * (1 - t) * v[g.index(i, j)] + s * (1 - t) * v[g.index(i + 1, j)] +
         (1 - s) * t * v[g.index(i, j + 1)] + s * t * v[g.index(i + 1, j + 1)];
}

}  // namespace gradcon

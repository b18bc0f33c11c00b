#pragma once

#include "gradcon/grid.hpp"

#include <string>
#include <vector>

namespace gradcon {

struct Polyline {
  double level = 0;
  bool closed = false;
  std::vector<Vec2> points;
};

struct ContourSet {
  std::vector<Polyline> lines;
  std::vector<std::string> warnings;
};

// Marching squares over cells whose four corners are finite. Saddles are
// split by the cell average; segments are chained in cell order, so the
// output is deterministic.
ContourSet contour_lines(const Grid2D& g, const std::vector<double>& v, const std::vector<double>& levels);

// Columns level,polyline,vertex,x,y; closed polylines repeat the first vertex.
std::string contours_csv(const ContourSet& c);

}  // namespace gradcon

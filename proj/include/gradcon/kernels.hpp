#pragma once

#include "gradcon/convex_body.hpp"
#include "gradcon/grid.hpp"

#include <vector>

namespace gradcon {

enum class Exec { serial, parallel };

// Per-node result of the brute-force envelope min_j gamma(x - y_j) + phi_j.
struct EnvelopeOut {
  std::vector<double> value;
  std::vector<int> argmin;
  // Number of separate cyclic runs of samples within the tie window;
  // -1 when every sample is inside the window.
  std::vector<int> clusters;
};

// tie: minimizers are the samples within min + tie.
EnvelopeOut envelope_serial(const Grid2D& g, const ConvexBody& K, const std::vector<Vec2>& pts,
                            const std::vector<double>& phi, double tie);
EnvelopeOut envelope_parallel(const Grid2D& g, const ConvexBody& K, const std::vector<Vec2>& pts,
                              const std::vector<double>& phi, double tie);
inline EnvelopeOut envelope(const Grid2D& g, const ConvexBody& K, const std::vector<Vec2>& pts,
                            const std::vector<double>& phi, double tie, Exec e) {
  return e == Exec::serial ? envelope_serial(g, K, pts, phi, tie) : envelope_parallel(g, K, pts, phi, tie);
}

// Discrete convolution with offsets (di, dj, w). Nodes whose stencil leaves
// the grid get NaN.
struct ConvStencil {
  std::vector<int> di, dj;
  std::vector<double> w;
  int reach = 0;
};
// Normalized smooth bump of radius eps sampled on the grid.
ConvStencil bump_stencil(double eps, double h);

std::vector<double> convolve_serial(const Grid2D& g, const std::vector<double>& in, const ConvStencil& s);
std::vector<double> convolve_parallel(const Grid2D& g, const std::vector<double>& in, const ConvStencil& s);
inline std::vector<double> convolve(const Grid2D& g, const std::vector<double>& in, const ConvStencil& s, Exec e) {
  return e == Exec::serial ? convolve_serial(g, in, s) : convolve_parallel(g, in, s);
}

}  // namespace gradcon

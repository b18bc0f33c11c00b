#include "gradcon/kernels.hpp"

#include <cmath>
#include <limits>

namespace gradcon {

namespace {

int count_clusters(const std::vector<double>& f, double cut) {
  const int n = static_cast<int>(f.size());
  int inside = 0, starts = 0;
  for (int j = 0; j < n; ++j) {
    const bool in = f[j] <= cut;
    inside += in;
    const bool prev = f[(j + n - 1) % n] <= cut;
    if (in && !prev) ++starts;
  }
  if (inside == n) return -1;
  return starts;
}

}  // namespace

// Reference version: one node at a time, straight loops.
EnvelopeOut envelope_serial(const Grid2D& g, const ConvexBody& K, const std::vector<Vec2>& pts,
                            const std::vector<double>& phi, double tie) {
  const int n = static_cast<int>(pts.size());
  require(n > 0, ErrorKind::invalid_state, "empty boundary sampling");
  EnvelopeOut out;
  out.value.resize(g.size());
  out.argmin.resize(g.size());
  out.clusters.resize(g.size());
  std::vector<double> f(n);
  for (int k = 0; k < g.size(); ++k) {
    const Vec2 x = g.node(k);
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int j = 0; j < n; ++j) {
      f[j] = K.gauge2(x.x() - pts[j].x(), x.y() - pts[j].y()) + phi[j];
      if (f[j] < best) {
        best = f[j];
        arg = j;
      }
    }
    out.value[k] = best;
    out.argmin[k] = arg;
    out.clusters[k] = count_clusters(f, best + tie);
  }
  return out;
}

// Same arithmetic per node, rows distributed over threads with a private
// scratch buffer each; results are bit-identical to the serial version.
EnvelopeOut envelope_parallel(const Grid2D& g, const ConvexBody& K, const std::vector<Vec2>& pts,
                              const std::vector<double>& phi, double tie) {
  const int n = static_cast<int>(pts.size());
  require(n > 0, ErrorKind::invalid_state, "empty boundary sampling");
  EnvelopeOut out;
  out.value.resize(g.size());
  out.argmin.resize(g.size());
  out.clusters.resize(g.size());
  std::vector<double> sx(n), sy(n);
  for (int j = 0; j < n; ++j) {
    sx[j] = pts[j].x();
    sy[j] = pts[j].y();
  }
#pragma omp parallel
  {
    std::vector<double> f(n);
#pragma omp for schedule(dynamic, 1)
    for (int row = 0; row < g.ny; ++row) {
      for (int i = 0; i < g.nx; ++i) {
        const int k = g.index(i, row);
        const Vec2 x = g.node(i, row);
        const double xx = x.x(), xy = x.y();
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (int j = 0; j < n; ++j) {
          const double v = K.gauge2(xx - sx[j], xy - sy[j]) + phi[j];
          f[j] = v;
          if (v < best) {
            best = v;
            arg = j;
          }
        }
        out.value[k] = best;
        out.argmin[k] = arg;
        out.clusters[k] = count_clusters(f, best + tie);
      }
    }
  }
  return out;
}

ConvStencil bump_stencil(double eps, double h) {
  ConvStencil s;
  s.reach = static_cast<int>(std::ceil(eps / h));
  double total = 0;
  for (int dj = -s.reach; dj <= s.reach; ++dj)
    for (int di = -s.reach; di <= s.reach; ++di) {
      const double r2 = (di * di + dj * dj) * h * h / (eps * eps);
      if (r2 >= 1) continue;
      const double w = std::exp(-1.0 / (1.0 - r2));
      s.di.push_back(di);
      s.dj.push_back(dj);
      s.w.push_back(w);
      total += w;
    }
  for (auto& w : s.w) w /= total;
  return s;
}

std::vector<double> convolve_serial(const Grid2D& g, const std::vector<double>& in, const ConvStencil& s) {
  std::vector<double> out(g.size(), std::numeric_limits<double>::quiet_NaN());
  for (int j = s.reach; j < g.ny - s.reach; ++j)
    for (int i = s.reach; i < g.nx - s.reach; ++i) {
      double acc = 0;
      for (std::size_t o = 0; o < s.w.size(); ++o) acc += s.w[o] * in[g.index(i + s.di[o], j + s.dj[o])];
      out[g.index(i, j)] = acc;
    }
  return out;
}

std::vector<double> convolve_parallel(const Grid2D& g, const std::vector<double>& in, const ConvStencil& s) {
  std::vector<double> out(g.size(), std::numeric_limits<double>::quiet_NaN());
  const int m = static_cast<int>(s.w.size());
  std::vector<int> off(m);
  for (int o = 0; o < m; ++o) off[o] = s.dj[o] * g.nx + s.di[o];
#pragma omp parallel for schedule(static)
  for (int j = s.reach; j < g.ny - s.reach; ++j) {
    const int base = j * g.nx;
    for (int i = s.reach; i < g.nx - s.reach; ++i) {
      const int k = base + i;
      double acc = 0;
      for (int o = 0; o < m; ++o) acc += s.w[o] * in[k + off[o]];
      out[k] = acc;
    }
  }
  return out;
}

}  // namespace gradcon

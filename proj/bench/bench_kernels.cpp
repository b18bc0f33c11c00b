// Serial vs OpenMP kernels: boundary envelope, mollifier convolution, and the
// discrete operator residual.
#include "gradcon/kernels.hpp"
#include "gradcon/scheme.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace gradcon;

namespace {

struct EnvelopeCase {
  Grid2D g;
  ConvexBody K = ConvexBody::p_ball(3, 1);
  std::vector<Vec2> pts;
  std::vector<double> phi;
  explicit EnvelopeCase(double h) {
    const Domain2D dom = Domain2D::ellipse(2, 1);
    g = make_grid(dom, h, 4);
    for (const auto& s : dom.sample(dom.recommended_samples(h))) {
      pts.push_back(s.point);
      phi.push_back(0.0);
    }
  }
};

void envelope_bench(benchmark::State& st, Exec e) {
  const EnvelopeCase c(1.0 / st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(envelope(c.g, c.K, c.pts, c.phi, 1e-9, e));
  st.counters["nodes"] = c.g.size();
}

void convolve_bench(benchmark::State& st, Exec e) {
  const double h = 1.0 / st.range(0);
  const Grid2D g = make_grid(Domain2D::disc(2), h, 8);
  std::vector<double> in(g.size());
  for (int k = 0; k < g.size(); ++k) in[k] = std::sin(g.node(k).x()) * std::cos(g.node(k).y());
  const ConvStencil s = bump_stencil(3 * h, h);
  for (auto _ : st) benchmark::DoNotOptimize(convolve(g, in, s, e));
}

void residual_bench(benchmark::State& st, Exec e) {
  const double h = 1.0 / st.range(0);
  const Domain2D dom = Domain2D::disc(2);
  const Grid2D g = make_grid(dom, h, 2);
  const Stencil sten = stencil_on_domain(g, dom, [](const Vec2&) { return 0.0; });
  const DiscreteOperator D(EllipticOperator::pucci_plus(1, 2, 1), sten);
  std::vector<double> u(sten.size()), out;
  for (int i = 0; i < sten.size(); ++i) u[i] = g.node(sten.nodes[i]).squaredNorm();
  for (auto _ : st) {
    D.residual(u, out, e);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK_CAPTURE(envelope_bench, serial, Exec::serial)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(envelope_bench, parallel, Exec::parallel)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(convolve_bench, serial, Exec::serial)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(convolve_bench, parallel, Exec::parallel)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(residual_bench, serial, Exec::serial)->Arg(64)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(residual_bench, parallel, Exec::parallel)->Arg(64)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();

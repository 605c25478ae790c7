#include <benchmark/benchmark.h>

#include "osmoflow/evolution.hpp"
#include "osmoflow/geometry.hpp"
#include "osmoflow/stokes.hpp"
#include "osmoflow/transport.hpp"

using namespace osmoflow;

namespace {

PolarCurve wavy(int n) {
  Eigen::ArrayXd cc(3), sc(2);
  cc << 0.12, 0.0, 0.05;
  sc << 0.0, 0.08;
  return PolarCurve::fourier(1.0, cc, sc, n);
}

void bm_curvature(benchmark::State& state) {
  PolarCurve c = wavy(int(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(curvature(c));
}
BENCHMARK(bm_curvature)->Arg(128)->Arg(256)->Arg(512);

void bm_stokes_solve(benchmark::State& state) {
  const int n = int(state.range(0));
  PolarCurve c = wavy(n);
  DomainMap map = build_domain_map(c, nullptr, n / 2 + 1);
  BoundaryScalar H = curvature(c);
  BoundaryVector nrm = normal(c);
  BoundaryVector traction(2, n);
  for (int j = 0; j < n; ++j) traction.col(j) = H[j] * nrm.col(j);
  for (auto _ : state) benchmark::DoNotOptimize(solve_traction(c, traction, map));
}
BENCHMARK(bm_stokes_solve)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void bm_transport_step(benchmark::State& state) {
  const int n = int(state.range(0));
  PolarCurve c = wavy(n);
  DomainMap map = build_domain_map(c, nullptr, n / 2 + 1);
  InteriorScalar xi = InteriorScalar::Constant(n / 2 + 1, n, 1.0);
  TransportInput in;
  in.map_old = &map;
  in.map_new = &map;
  for (auto _ : state) benchmark::DoNotOptimize(transport_step(xi, 1e-4, in));
}
BENCHMARK(bm_transport_step)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void bm_coupled_step(benchmark::State& state) {
  const int n = int(state.range(0));
  SimState st;
  st.mode = Mode::Full;
  st.kappa = 1.0;
  st.curve = wavy(n);
  st.xi = InteriorScalar::Constant(n / 2 + 1, n, 0.8);
  for (auto _ : state) benchmark::DoNotOptimize(step_coupled(st, 1e-5));
}
BENCHMARK(bm_coupled_step)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

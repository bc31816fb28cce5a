#include <benchmark/benchmark.h>

#include <cmath>

#include "smap/geometry.hpp"
#include "smap/initdata.hpp"
#include "smap/linops.hpp"
#include "smap/modulation_ode.hpp"
#include "smap/pde_solver.hpp"

using namespace smap;

static void BM_Rhs(benchmark::State& state) {
  const auto p = perturbed_ground_state(1, RadialGrid::geometric(state.range(0), 50.0, 4.0), 1e-2);
  for (auto _ : state) benchmark::DoNotOptimize(equivariant_rhs(p));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Rhs)->RangeMultiplier(2)->Range(256, 4096)->Complexity(benchmark::oN);

static void BM_MidpointStep(benchmark::State& state) {
  const auto g = RadialGrid::geometric(state.range(0), 50.0, 4.0);
  const auto p = perturbed_ground_state(1, g, 1e-2);
  const SolverConfig cfg;
  const double dt = default_dt(g, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(step(p, dt, cfg));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MidpointStep)->RangeMultiplier(2)->Range(256, 4096)->Complexity(benchmark::oN);

static void BM_SolveH(benchmark::State& state) {
  const auto g = RadialGrid::geometric(state.range(0), 1e4, 8.0);
  const OperatorH op(g);
  const auto src = RadialFunction::sample(g, lambda_phi);
  for (auto _ : state) benchmark::DoNotOptimize(solve_H(op, src));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveH)->RangeMultiplier(2)->Range(500, 8000)->Complexity(benchmark::oN);

static void BM_BlowupData(benchmark::State& state) {
  BlowupDataSpec spec;
  spec.b0 = 0.01;
  spec.grid = GridSpec{Spacing::GeometricStretch, static_cast<std::size_t>(state.range(0)), 60.0, 4.0};
  for (auto _ : state) benchmark::DoNotOptimize(build_blowup_data(spec));
}
BENCHMARK(BM_BlowupData)->Arg(1200);

static void BM_OdeToFloor(benchmark::State& state) {
  ModState s0;
  s0.b = 0.01;
  const double floor = std::pow(10.0, -static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(integrate(s0, {}, {floor}));
}
BENCHMARK(BM_OdeToFloor)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_Fit(benchmark::State& state) {
  ModState s0;
  s0.b = 0.01;
  const auto traj = integrate(s0, {}, {1e-40});
  for (auto _ : state) benchmark::DoNotOptimize(fit_blowup_law(traj));
}
BENCHMARK(BM_Fit);

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "idleq/fluid_control.hpp"
#include "idleq/oracle.hpp"

using namespace idleq;

namespace {

void BM_SolveFluid(benchmark::State& state) {
  CostModel cost;
  for (auto _ : state) benchmark::DoNotOptimize(solve_fluid(2.0, 1.0, cost).b_star);
}
BENCHMARK(BM_SolveFluid);

void BM_SolveFluidHcConvex(benchmark::State& state) {
  CostModel cost;
  cost.a = 0.5;
  cost.c = 0.5;
  const auto pat = DistributionSpec::hyperexponential({0.5, 0.5}, {3.0, 0.6}, Role::Patience);
  for (auto _ : state) benchmark::DoNotOptimize(solve_fluid_hc(2.0, 1.0, pat, cost, true).b_star);
}
BENCHMARK(BM_SolveFluidHcConvex);

// No DFR guarantee: grid scan plus golden section, quadrature at every point.
void BM_SolveFluidHcScan(benchmark::State& state) {
  CostModel cost;
  cost.a = 0.5;
  cost.c = 0.5;
  const auto pat = DistributionSpec::lognormal(0.0, 0.5, Role::Patience);
  for (auto _ : state) benchmark::DoNotOptimize(solve_fluid_hc(2.0, 1.0, pat, cost, false).b_star);
}
BENCHMARK(BM_SolveFluidHcScan)->Unit(benchmark::kMillisecond);

void BM_ErlangAOracle(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(erlang_a_oracle(n, 1.2 * n, 1.0, 0.5).E_busy);
}
BENCHMARK(BM_ErlangAOracle)->Arg(20)->Arg(500);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "idleq/fluid_model.hpp"

using namespace idleq;

namespace {

void BM_FluidStep(benchmark::State& state) {
  const double dx = 1.0 / static_cast<double>(state.range(0));
  FluidModel m(DistributionSpec::erlang(2, 2.0), DistributionSpec::exponential(1.0, Role::Patience), dx);
  auto s = m.invariant_state(0.8, 1.0, 1.2);
  for (auto _ : state) {
    s = m.step(s, 1.2, FluidPolicy::busy_cap(0.8));
    benchmark::DoNotOptimize(s.B);
  }
  state.counters["cells"] = static_cast<double>(m.service_cells() + m.patience_cells());
}
BENCHMARK(BM_FluidStep)->Arg(100)->Arg(200)->Arg(800);

void BM_FluidIntegrate(benchmark::State& state) {
  const auto svc = DistributionSpec::lognormal(0.0, 0.5);
  const auto pat = DistributionSpec::hyperexponential({0.5, 0.5}, {3.0, 0.6}, Role::Patience);
  FluidModel m(svc, pat, FluidModel::default_dx(svc, pat));
  for (auto _ : state) benchmark::DoNotOptimize(m.integrate(m.empty_state(), 10.0, 1.5, FluidPolicy::non_idling()));
}
BENCHMARK(BM_FluidIntegrate)->Unit(benchmark::kMillisecond);

}  // namespace

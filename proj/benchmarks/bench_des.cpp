#include <benchmark/benchmark.h>

#include "idleq/des_engine.hpp"

using namespace idleq;

namespace {

// Events per second of the simulator under pi* in the configs/example1.yaml system.
void BM_SimulatePiStar(benchmark::State& state) {
  SimParams p;
  p.n = static_cast<int>(state.range(0));
  p.lambda = 2.0;
  p.policy = PolicySpec::thinned(0.25);
  p.horizon = 200.0;
  p.burn_in = 20.0;
  std::int64_t arrivals = 0;
  for (auto _ : state) {
    Simulator sim(p);
    auto est = sim.run();
    benchmark::DoNotOptimize(est.total.mean);
    arrivals += static_cast<std::int64_t>(sim.state().counters.arrivals);
  }
  state.counters["arrivals/s"] = benchmark::Counter(static_cast<double>(arrivals), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SimulatePiStar)->Arg(10)->Arg(250)->Unit(benchmark::kMillisecond);

void BM_SimulateErlangMix(benchmark::State& state) {
  SimParams p;
  p.n = static_cast<int>(state.range(0));
  p.lambda = 1.3;
  p.service = DistributionSpec::erlang(2, 2.0, Role::Service);
  p.patience = DistributionSpec::hyperexponential({0.5, 0.5}, {3.0, 0.6}, Role::Patience);
  p.horizon = 200.0;
  p.burn_in = 20.0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(p).total.mean);
}
BENCHMARK(BM_SimulateErlangMix)->Arg(20)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace

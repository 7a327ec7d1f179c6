#include <benchmark/benchmark.h>

#include "icp/experiments.hpp"
#include "icp/front_chain.hpp"
#include "icp/rng.hpp"
#include "icp/simulator.hpp"

namespace {

using namespace icp;

// One censored run of the homogeneous process; arg is lambda * 10.
void BM_SimulateRun(benchmark::State& state) {
  const ModelParams params{state.range(0) / 10.0, RateProfile::homogeneous(0.5, 1.0), 0};
  const StopRule stop{100.0, Site(200)};
  std::uint64_t k = 0, events = 0;
  for (auto _ : state) {
    const auto r = simulate_run(params, stop, derive_seed(1, k++));
    events += r.events;
    benchmark::DoNotOptimize(r);
  }
  state.counters["events/s"] = benchmark::Counter(double(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SimulateRun)->Arg(15)->Arg(35)->Arg(60);

void BM_SimulateFront(benchmark::State& state) {
  const auto chain = FrontChain::from_params({3.0, RateProfile::homogeneous(0.5, 1.0), 0});
  const StopRule stop{100.0, Site(400)};
  std::uint64_t k = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_front(chain, 0, stop, derive_seed(2, k++)));
}
BENCHMARK(BM_SimulateFront);

void BM_AbsorptionBracket(benchmark::State& state) {
  const auto chain = FrontChain::constant(2.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(absorption_probability(chain, 0, Site(state.range(0))));
}
BENCHMARK(BM_AbsorptionBracket)->Arg(64)->Arg(4096);

// Shared-randomness sweep over five lambdas, 50 replicas per iteration.
void BM_SharedSweep(benchmark::State& state) {
  const double grid[] = {0.5, 1.0, 2.0, 4.0, 8.0};
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sweep(RateProfile::homogeneous(0.5, 1.0), 0, grid, {50.0, Site(100)}, 50, seed++, true));
  }
}
BENCHMARK(BM_SharedSweep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

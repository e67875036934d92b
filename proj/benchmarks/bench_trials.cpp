#include <benchmark/benchmark.h>

#include "dam/dam.hpp"

namespace {

using namespace dam;

void BM_ExponentialTrial(benchmark::State& state) {
  TrialSpec spec;
  spec.model = ModelSpec::exponential();
  spec.n_neurons = 40;
  spec.n_patterns = static_cast<std::size_t>(state.range(0));
  spec.n_flips = 5;
  std::uint64_t t = 0;
  for (auto _ : state) {
    spec.seed = trial_seed(7, 0, t++);
    benchmark::DoNotOptimize(run_trial(spec));
  }
}
BENCHMARK(BM_ExponentialTrial)->Arg(25)->Arg(561)->Arg(13245)->Unit(benchmark::kMicrosecond);

void BM_PolynomialFixedPoint(benchmark::State& state) {
  TrialSpec spec;
  spec.model = ModelSpec::polynomial(3);
  spec.n_neurons = 60;
  spec.n_patterns = static_cast<std::size_t>(state.range(0));
  spec.n_flips = 6;
  spec.scheduler.kind = SchedulerKind::ToFixedPoint;
  std::uint64_t t = 0;
  for (auto _ : state) {
    spec.seed = trial_seed(8, 0, t++);
    benchmark::DoNotOptimize(run_trial(spec));
  }
}
BENCHMARK(BM_PolynomialFixedPoint)->Arg(73)->Arg(1758)->Unit(benchmark::kMicrosecond);

void BM_Sweep(benchmark::State& state) {
  TrialSpec spec;
  spec.model = ModelSpec::exponential();
  spec.n_neurons = 40;
  spec.n_patterns = 561;
  spec.n_flips = 5;
  SweepOptions options;
  options.n_trials = 64;
  options.parallelism = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(std::span<const TrialSpec>(&spec, 1), options));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 64);
}
BENCHMARK(BM_Sweep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

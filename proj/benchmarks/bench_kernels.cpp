#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "dam/dam.hpp"

namespace {

using namespace dam;

void BM_Overlap(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto store = generate_patterns(n, 2, SeedSpec{1, "bench", 0});
  for (auto _ : state) benchmark::DoNotOptimize(overlap(store[0], store[1]));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * 2 * static_cast<std::int64_t>(n / 8));
}
BENCHMARK(BM_Overlap)->RangeMultiplier(8)->Range(64, 1 << 18);

void BM_OverlapsWith(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto store = generate_patterns(1000, m, SeedSpec{2, "bench", 0});
  const Pattern probe(store[0]);
  for (auto _ : state) benchmark::DoNotOptimize(store.overlaps_with(probe));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * static_cast<std::int64_t>(m));
}
BENCHMARK(BM_OverlapsWith)->RangeMultiplier(10)->Range(10, 100000);

void BM_ExpDeltaEnergy(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto m = static_cast<std::size_t>(state.range(1));
  const auto store = generate_patterns(n, m, SeedSpec{3, "bench", 0});
  const NetworkState net(store, corrupt_on_sphere(store[0], n / 8, SeedSpec{3, "flip", 0}));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(exp_delta_energy(net, i));
    i = (i + 1) % n;
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * static_cast<std::int64_t>(m));
}
BENCHMARK(BM_ExpDeltaEnergy)->Args({40, 25})->Args({40, 13245})->Args({1000, 1000});

// Integer combinations of powers of e that cancel to 1e-16 relative force the wide path.
void BM_SignedExpSumFallback(benchmark::State& state) {
  const std::vector<std::int64_t> coeffs{-28245729, 10391023};
  for (auto _ : state) benchmark::DoNotOptimize(signed_exp_sum(coeffs, 0));
}
BENCHMARK(BM_SignedExpSumFallback);

void BM_NspinField(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto degree = static_cast<unsigned>(state.range(1));
  const auto store = generate_patterns(n, 200, SeedSpec{4, "bench", 0});
  const NetworkState net(store, Pattern(store[0]));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nspin_local_field(net, i, degree));
    i = (i + 1) % n;
  }
}
// (1000, 10) stays on 128-bit integers; (10000, 14) needs arbitrary precision.
BENCHMARK(BM_NspinField)->Args({60, 3})->Args({1000, 10})->Args({10000, 14});

}  // namespace

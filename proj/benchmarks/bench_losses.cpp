// Pairwise similarity matrix vs centroid loss, N = 2^10 .. 2^14, d = 32.
// Counters: peak_bytes of the tracked working buffers.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "cosseg/bench.hpp"

namespace {

constexpr cosseg::Index kDim = 32;

cosseg::Matrix gaussian(cosseg::Index n) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(n));
  std::normal_distribution<double> g(0.0, 1.0);
  cosseg::Matrix m(n, kDim);
  for (cosseg::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

void BM_Pairwise(benchmark::State& state) {
  const cosseg::Matrix f = gaussian(state.range(0));
  cosseg::LossMeasurement m;
  for (auto _ : state) {
    m = cosseg::pairwise_similarity_loss(f);
    benchmark::DoNotOptimize(m.value);
  }
  state.counters["peak_bytes"] = static_cast<double>(m.peak_bytes);
  state.SetComplexityN(state.range(0));
}

void BM_Centroid(benchmark::State& state) {
  const cosseg::Matrix e = gaussian(state.range(0));
  std::vector<int> ids(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i % 8);
  cosseg::LossMeasurement m;
  for (auto _ : state) {
    m = cosseg::centroid_similarity_loss(e, ids, 0.9, 0.4);
    benchmark::DoNotOptimize(m.value);
  }
  state.counters["peak_bytes"] = static_cast<double>(m.peak_bytes);
  state.SetComplexityN(state.range(0));
}

}  // namespace

BENCHMARK(BM_Pairwise)->RangeMultiplier(2)->Range(1 << 10, 1 << 14)->Unit(benchmark::kMillisecond)->Complexity();
BENCHMARK(BM_Centroid)->RangeMultiplier(2)->Range(1 << 10, 1 << 14)->Unit(benchmark::kMicrosecond)->Complexity();

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "rirkit/rirkit.hpp"

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

rirkit::FloatMatrix gaussian(std::size_t rows, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n;
  rirkit::FloatMatrix m(rows, dim);
  for (float& v : m.data) v = n(rng);
  return m;
}

// One second of speech against RIRs from 0.25 s to 2 s.
void BM_Convolve(benchmark::State& state) {
  const rirkit::AudioBuffer x(noise(16000, 1));
  const rirkit::AudioBuffer h(noise(static_cast<std::size_t>(state.range(0)), 2));
  for (auto _ : state) benchmark::DoNotOptimize(rirkit::convolve(x, h));
  state.SetItemsProcessed(state.iterations() * 16000);
}
BENCHMARK(BM_Convolve)->Arg(4000)->Arg(16000)->Arg(32000)->Unit(benchmark::kMillisecond);

void BM_StftLoss(benchmark::State& state) {
  const rirkit::AudioBuffer a(noise(16000, 3)), b(noise(16000, 4));
  for (auto _ : state) benchmark::DoNotOptimize(rirkit::stft_loss(a, b, a, b));
}
BENCHMARK(BM_StftLoss)->Unit(benchmark::kMillisecond);

void BM_T60(benchmark::State& state) {
  const rirkit::Rir h = rirkit::simulate_rir(rirkit::ShoeboxRoom::uniform({6, 5, 3}, 0.25), {1, 1, 1.5},
                                             {4, 3, 1.2}, {SIZE_MAX, 16000, 16000, 100.0});
  for (auto _ : state) benchmark::DoNotOptimize(rirkit::t60(h));
}
BENCHMARK(BM_T60)->Unit(benchmark::kMicrosecond);

// Encode cost per vector for codebook sizes up to 8192.
void BM_RvqEncode(benchmark::State& state) {
  const std::size_t k = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = 64, layers = 8;
  const auto init = gaussian(k, dim, 5);
  const auto codec = rirkit::RvqCodec::create({layers, k, dim, 0.99, 0.25, 5}, init);
  const auto probe = gaussian(64, dim, 6);
  for (auto _ : state) benchmark::DoNotOptimize(codec.encode_batch(probe));
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_RvqEncode)->Arg(256)->Arg(1024)->Arg(8192)->Unit(benchmark::kMillisecond);

void BM_StoreRetrieve(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  rirkit::EmbeddingStore store;
  for (std::size_t i = 0; i < n; ++i) {
    store.add_entry("e" + std::to_string(i), {noise(rirkit::kDefaultEmbeddingDim, 100 + i)}, rirkit::Rir({1.0}));
  }
  const rirkit::Embedding q{noise(rirkit::kDefaultEmbeddingDim, 7)};
  for (auto _ : state) benchmark::DoNotOptimize(store.retrieve(q, 5));
}
BENCHMARK(BM_StoreRetrieve)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

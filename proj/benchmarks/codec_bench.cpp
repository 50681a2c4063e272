#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "p2codec/adaptive_model.hpp"
#include "p2codec/container.hpp"
#include "p2codec/range_coder.hpp"

using namespace p2codec;

namespace {

Pmf256 PeakyPmf(std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  Pmf256 pmf;
  for (auto& p : pmf.p) p = std::pow(expo(rng), 4.0);
  const double s = pmf.sum();
  for (auto& p : pmf.p) p /= s;
  return pmf;
}

ImageBuffer NoisyGradient(uint32_t side) {
  std::mt19937_64 rng(7);
  ImageBuffer img(side, side, 3);
  for (uint32_t y = 0; y < side; ++y)
    for (uint32_t x = 0; x < side; ++x)
      for (uint32_t c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<uint8_t>(x * 2 + y + c * 30 + rng() % 5);
  return img;
}

}  // namespace

static void BM_QuantizeCdf(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::vector<Pmf256> pmfs;
  for (int i = 0; i < 64; ++i) pmfs.push_back(PeakyPmf(rng));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(QuantizeCdf(pmfs[i++ % pmfs.size()], static_cast<unsigned>(state.range(0))));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_QuantizeCdf)->Arg(16)->Arg(24);

static void BM_RangeEncode(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto cdf = QuantizeCdf(PeakyPmf(rng));
  std::vector<uint8_t> symbols(static_cast<std::size_t>(state.range(0)));
  for (auto& s : symbols) s = static_cast<uint8_t>(rng() & 0xFF);
  for (auto _ : state) benchmark::DoNotOptimize(EncodeSymbols(symbols, [&](std::size_t) { return cdf; }));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RangeEncode)->Arg(768)->Arg(1 << 16);

static void BM_RangeDecode(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto cdf = QuantizeCdf(PeakyPmf(rng));
  std::vector<uint8_t> symbols(static_cast<std::size_t>(state.range(0)));
  for (auto& s : symbols) s = static_cast<uint8_t>(rng() & 0xFF);
  const auto bits = EncodeSymbols(symbols, [&](std::size_t) { return cdf; });
  for (auto _ : state) {
    benchmark::DoNotOptimize(DecodeSymbols(bits, symbols.size(), [&](std::size_t) { return cdf; }));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RangeDecode)->Arg(768)->Arg(1 << 16);

static void BM_Compress(benchmark::State& state) {
  const auto img = NoisyGradient(64);
  AdaptiveModelProvider provider(static_cast<int>(state.range(0)));
  CodecConfig cfg;
  cfg.mode = state.range(1) ? OrderingMode::kChannelJoint : OrderingMode::kChannelIndependent;
  for (auto _ : state) benchmark::DoNotOptimize(Compress(img, provider, cfg));
  state.SetItemsProcessed(state.iterations() * img.subpixel_count());
}
BENCHMARK(BM_Compress)->ArgsProduct({{0, 1, 2}, {0, 1}})->Unit(benchmark::kMillisecond);

static void BM_Decompress(benchmark::State& state) {
  const auto img = NoisyGradient(64);
  AdaptiveModelProvider provider(static_cast<int>(state.range(0)));
  const auto container = Compress(img, provider, CodecConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(Decompress(container, provider));
  state.SetItemsProcessed(state.iterations() * img.subpixel_count());
}
BENCHMARK(BM_Decompress)->Arg(0)->Arg(2)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

#pragma once

// Helpers shared by the unit and acceptance suites. The oracles here are
// written independently of the library code they check.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "p2codec/image.hpp"
#include "p2codec/image_io.hpp"

namespace p2test {

inline p2codec::ImageBuffer RandomImage(std::mt19937_64& rng, uint32_t w, uint32_t h, uint32_t channels) {
  std::vector<uint8_t> samples(std::size_t{w} * h * channels);
  std::uniform_int_distribution<int> byte(0, 255);
  for (auto& s : samples) s = static_cast<uint8_t>(byte(rng));
  return p2codec::ImageBuffer(w, h, channels, std::move(samples));
}

// Mixes flat regions, gradients and noise so adaptive models see both
// repetitive and unpredictable input.
inline p2codec::ImageBuffer StructuredImage(std::mt19937_64& rng, uint32_t w, uint32_t h, uint32_t channels) {
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> kind(0, 3);
  const int k = kind(rng);
  const int base = byte(rng);
  p2codec::ImageBuffer img(w, h, channels);
  for (uint32_t y = 0; y < h; ++y) {
    for (uint32_t x = 0; x < w; ++x) {
      for (uint32_t c = 0; c < channels; ++c) {
        int v = base;
        if (k == 1) v = base + int(x) * 3 + int(y) + int(c) * 20;
        if (k == 2) v = ((x / 4 + y / 4) % 2) ? 240 : 15;
        if (k == 3) v = byte(rng);
        img.at(x, y, c) = static_cast<uint8_t>(v & 0xFF);
      }
    }
  }
  return img;
}

// Brute-force order-k add-alpha counting model: for the next position n,
// scans every earlier position j whose preceding min(k, j) symbols equal the
// preceding min(k, n) symbols (same length too) and tallies s[j].
inline std::array<double, 256> CountingOraclePmf(std::span<const uint8_t> history, int order, double alpha) {
  const std::size_t n = history.size();
  const std::size_t len_n = std::min<std::size_t>(order, n);
  std::array<uint64_t, 256> counts{};
  uint64_t total = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t len_j = std::min<std::size_t>(order, j);
    if (len_j != len_n) continue;
    bool same = true;
    for (std::size_t t = 1; t <= len_n && same; ++t) same = history[j - t] == history[n - t];
    if (!same) continue;
    ++counts[history[j]];
    ++total;
  }
  std::array<double, 256> p{};
  for (int z = 0; z < 256; ++z) p[z] = (double(counts[z]) + alpha) / (double(total) + 256.0 * alpha);
  return p;
}

inline double ShannonEntropyBits(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return h;
}



inline std::filesystem::path DataDir() { return std::filesystem::path(P2CODEC_TEST_DATA_DIR); }

}  // namespace p2test

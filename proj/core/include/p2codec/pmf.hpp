#pragma once

#include <array>
#include <span>
#include <vector>

#include "p2codec/token_bridge.hpp"

namespace p2codec {

// Next-symbol distribution over the 256 subpixel values.
struct Pmf256 {
  std::array<double, 256> p{};

  static Pmf256 Uniform();

  double sum() const;
  std::size_t argmax() const;
  // Non-negative, finite, and summing to 1 within `tolerance`.
  bool valid(double tolerance = 1e-9) const;

  friend bool operator==(const Pmf256&, const Pmf256&) = default;
};

// Raw predictive logits, one per vocabulary entry.
struct LogitVector {
  std::vector<double> values;
};

// Gathers the logits at the digital token IDs and applies a max-shifted
// softmax. Tokens outside the map receive no mass. Throws
// kCorruptProviderOutput on non-finite logits or IDs outside the vector.
Pmf256 SampleDistribution(const LogitVector& logits, const DigitalTokenMap& map);

// Softmax over logits that are already ordered by subpixel value.
Pmf256 SoftmaxGathered(std::span<const double, 256> logits);

}  // namespace p2codec

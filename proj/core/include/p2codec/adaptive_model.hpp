#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>

#include "p2codec/provider.hpp"

namespace p2codec {

// Order-k frequency model with add-alpha smoothing. The context of a symbol
// is the previous k symbols (fewer at the start of a sequence; contexts of
// different lengths never share counts). Each session learns from scratch.
//
//   p(z | ctx) = (count(ctx, z) + alpha) / (count(ctx) + 256 * alpha)
//
// Counts are integers and the probability is a single division, so results
// are bit-identical across platforms.
class AdaptiveModelProvider final : public ProbabilityProvider {
 public:
  static constexpr int kMaxOrder = 2;

  explicit AdaptiveModelProvider(int order, double alpha = 1.0, std::size_t context_window = kUnboundedContext);

  int order() const { return order_; }
  double alpha() const { return alpha_; }

  ProviderInfo Prepare(const PromptConfig& prompt, OrderingMode mode) override;
  std::unique_ptr<ProviderSession> Begin(const PromptConfig& prompt, OrderingMode mode,
                                         std::optional<uint8_t> channel = std::nullopt) override;
  const DigitalTokenMap& token_map() override { return map_; }
  std::string describe() const override;

  uint64_t fingerprint() const { return fingerprint_; }

 private:
  int order_;
  double alpha_;
  std::size_t context_window_;
  DigitalTokenMap map_;
  uint64_t fingerprint_;
};

}  // namespace p2codec

#include "p2codec/adaptive_model.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <string>
#include <unordered_map>
#include <vector>

#include "p2codec/error.hpp"

namespace p2codec {

namespace {

struct ContextCounts {
  std::array<uint32_t, 256> count{};
  uint32_t total = 0;
};

class AdaptiveSession final : public ProviderSession {
 public:
  AdaptiveSession(int order, double alpha, std::size_t prompt_tokens, std::size_t context_window)
      : order_(order), alpha_(alpha), prompt_tokens_(prompt_tokens), context_window_(context_window) {}

  Pmf256 next_pmf() override {
    if (context_window_ != kUnboundedContext && prompt_tokens_ + history_.size() + 1 > context_window_) {
      throw CodecError(ErrorKind::kContextOverflow, "context of " + std::to_string(prompt_tokens_ + history_.size()) +
                                                        " tokens leaves no room in a window of " +
                                                        std::to_string(context_window_));
    }
    Pmf256 pmf;
    const auto it = table_.find(CurrentKey());
    const double denominator = (it == table_.end() ? 0.0 : double(it->second.total)) + 256.0 * alpha_;
    for (std::size_t z = 0; z < 256; ++z) {
      const double numerator = (it == table_.end() ? 0.0 : double(it->second.count[z])) + alpha_;
      pmf.p[z] = numerator / denominator;
    }
    return pmf;
  }

  void observe(uint8_t symbol) override {
    ContextCounts& counts = table_[CurrentKey()];
    ++counts.count[symbol];
    ++counts.total;
    history_.push_back(symbol);
  }

  std::unique_ptr<ProviderSession> clone() const override { return std::make_unique<AdaptiveSession>(*this); }

  std::size_t prompt_token_count() const override { return prompt_tokens_; }
  std::span<const uint8_t> history() const override { return history_; }
  bool deterministic() const override { return true; }

 private:
  // Length of the available context in the top bits, the symbols below.
  uint64_t CurrentKey() const {
    const std::size_t len = std::min<std::size_t>(order_, history_.size());
    uint64_t symbols = 0;
    for (std::size_t i = history_.size() - len; i < history_.size(); ++i) symbols = (symbols << 8) | history_[i];
    return (uint64_t{len} << 32) | symbols;
  }

  int order_;
  double alpha_;
  std::size_t prompt_tokens_;
  std::size_t context_window_;
  std::vector<uint8_t> history_;
  std::unordered_map<uint64_t, ContextCounts> table_;
};

}  // namespace

AdaptiveModelProvider::AdaptiveModelProvider(int order, double alpha, std::size_t context_window)
    : order_(order), alpha_(alpha), context_window_(context_window), map_(DigitalTokenMap::Identity()) {
  if (order < 0 || order > kMaxOrder) {
    throw CodecError(ErrorKind::kConfig, "adaptive model order must be 0.." + std::to_string(kMaxOrder));
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw CodecError(ErrorKind::kConfig, "smoothing alpha must be > 0");

  const std::string tag = "builtin-adaptive/order" + std::to_string(order);
  std::vector<uint8_t> bytes(tag.begin(), tag.end());
  const uint64_t alpha_bits = std::bit_cast<uint64_t>(alpha);
  for (int b = 0; b < 8; ++b) bytes.push_back(static_cast<uint8_t>(alpha_bits >> (8 * b)));
  fingerprint_ = Fnv1a64(bytes);
}

ProviderInfo AdaptiveModelProvider::Prepare(const PromptConfig& prompt, OrderingMode /*mode*/) {
  return ProviderInfo{
      .fingerprint = fingerprint_,
      .map_fingerprint = map_.fingerprint(),
      .context_window = context_window_,
      .prompt_tokens = SimpleWordTokenize(prompt.effective_text()).size(),
      .deterministic = true,
  };
}

std::unique_ptr<ProviderSession> AdaptiveModelProvider::Begin(const PromptConfig& prompt, OrderingMode /*mode*/,
                                                              std::optional<uint8_t> /*channel*/) {
  const std::size_t prompt_tokens = SimpleWordTokenize(prompt.effective_text()).size();
  return std::make_unique<AdaptiveSession>(order_, alpha_, prompt_tokens, context_window_);
}

std::string AdaptiveModelProvider::describe() const {
  char alpha[32];
  std::snprintf(alpha, sizeof(alpha), "%g", alpha_);
  return "builtin:order" + std::to_string(order_) + " (alpha=" + alpha + ")";
}

}  // namespace p2codec

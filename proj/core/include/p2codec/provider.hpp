#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "p2codec/image.hpp"
#include "p2codec/pmf.hpp"
#include "p2codec/token_bridge.hpp"

namespace p2codec {

inline constexpr std::size_t kUnboundedContext = std::numeric_limits<std::size_t>::max();

// What a provider reports once it has been set up for a (prompt, mode).
struct ProviderInfo {
  uint64_t fingerprint = 0;
  uint64_t map_fingerprint = 0;
  std::size_t context_window = kUnboundedContext;
  std::size_t prompt_tokens = 0;
  bool deterministic = false;
};

// One autoregressive context: prompt plus the symbols observed so far. A
// session is used by one thread at a time.
class ProviderSession {
 public:
  virtual ~ProviderSession() = default;

  // Distribution of the next symbol given the prompt and full history.
  virtual Pmf256 next_pmf() = 0;
  // Appends a symbol to the context.
  virtual void observe(uint8_t symbol) = 0;
  virtual std::unique_ptr<ProviderSession> clone() const = 0;

  virtual std::size_t prompt_token_count() const = 0;
  virtual std::span<const uint8_t> history() const = 0;
  virtual bool deterministic() const = 0;
};

// Source of next-symbol distributions. Construction and Begin are
// thread-safe; sessions are independent.
class ProbabilityProvider {
 public:
  virtual ~ProbabilityProvider() = default;

  // Installs the prompt/mode configuration (remote providers handshake here)
  // and reports fingerprints, window and prompt length. Idempotent for equal
  // arguments.
  virtual ProviderInfo Prepare(const PromptConfig& prompt, OrderingMode mode) = 0;

  // Fresh session with empty symbol context. `channel` selects the channel
  // under kChannelIndependent.
  virtual std::unique_ptr<ProviderSession> Begin(const PromptConfig& prompt, OrderingMode mode,
                                                 std::optional<uint8_t> channel = std::nullopt) = 0;

  virtual const DigitalTokenMap& token_map() = 0;
  virtual std::string describe() const = 0;
};

struct FactorizationResult {
  // r(r|ctx) * r(g|ctx,r) * r(b|ctx,r,g) on the live session.
  double product_of_conditionals = 0.0;
  // The same three steps replayed on a clone taken before the pixel.
  double joint = 0.0;
  // P(ctx, pixel) / P(ctx), each sequence probability evaluated from a fresh
  // session in log space. Agrees with the others to floating tolerance only.
  double sequence_ratio = 0.0;
};

// Chain-rule decomposition of a pixel's joint probability into per-channel
// conditionals. Throws kUnsupportedCheck for non-deterministic providers.
FactorizationResult JointConditionalFactorizationCheck(ProbabilityProvider& provider,
                                                       std::span<const uint8_t> pixel_context,
                                                       const std::array<uint8_t, 3>& pixel,
                                                       const PromptConfig& prompt = {});

}  // namespace p2codec

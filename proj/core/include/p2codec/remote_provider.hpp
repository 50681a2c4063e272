#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>

#include "p2codec/provider.hpp"
#include "p2codec/wire_protocol.hpp"

namespace p2codec {

// Client side of the wire protocol. The server owns the language model and
// gathers the 256 digital-token logits; this side applies the softmax, so
// all entropy-critical arithmetic happens in one place.
//
// One connection is shared by every session; requests are serialized on it.
// Sessions are created with RESET and fed symbol deltas through PREDICT.
class RemoteProvider final : public ProbabilityProvider {
 public:
  explicit RemoteProvider(std::unique_ptr<wire::Transport> transport, std::string description = "remote");

  ProviderInfo Prepare(const PromptConfig& prompt, OrderingMode mode) override;
  std::unique_ptr<ProviderSession> Begin(const PromptConfig& prompt, OrderingMode mode,
                                         std::optional<uint8_t> channel = std::nullopt) override;
  // Requires a prior Prepare (the map arrives with INIT_OK).
  const DigitalTokenMap& token_map() override;
  std::string describe() const override { return description_; }

  // Internal to sessions.
  wire::Logits256 Predict(uint64_t session_id, std::span<const uint8_t> new_symbols);
  void Reset(uint64_t session_id);
  uint64_t NextSessionId() { return next_session_.fetch_add(1); }

 private:
  wire::Message RoundTrip(const wire::Message& request);

  std::unique_ptr<wire::Transport> transport_;
  std::string description_;
  std::mutex mu_;
  std::optional<std::pair<std::string, OrderingMode>> configured_;
  std::optional<wire::InitResponse> init_;
  std::optional<DigitalTokenMap> map_;
  std::atomic<uint64_t> next_session_{1};
};

// "builtin:order0|order1|order2", "remote:host:port" or "exec:<command>".
// `alpha` applies to built-in providers.
std::unique_ptr<ProbabilityProvider> MakeProvider(const std::string& spec, double alpha = 1.0);

}  // namespace p2codec

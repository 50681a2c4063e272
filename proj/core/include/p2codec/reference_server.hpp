#pragma once

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "p2codec/provider.hpp"
#include "p2codec/wire_protocol.hpp"

namespace p2codec::wire {

// Model side of the protocol. Implementations hold per-session contexts.
class LogitBackend {
 public:
  virtual ~LogitBackend() = default;
  virtual InitResponse Init(const InitRequest& request) = 0;
  virtual void Reset(uint64_t session_id) = 0;
  // Full-vocabulary logits after appending `new_symbols` to the session.
  virtual std::vector<float> Predict(uint64_t session_id, std::span<const uint8_t> new_symbols) = 0;
  virtual const std::array<uint32_t, 256>& digital_token_ids() const = 0;
};

// Answers frames until the peer closes. Backend failures are reported as
// ERROR frames; the loop only exits on EOF or transport failure.
void ServeConnection(Transport& transport, LogitBackend& backend);

// Deterministic stand-in for a language model server: a synthetic vocabulary
// of `vocab_size` tokens whose digit tokens sit at scattered IDs, with the
// logits of those tokens set to log p from an adaptive order-k model and
// every other token given a large logit (which the gather must discard).
class ReferenceLogitBackend final : public LogitBackend {
 public:
  ReferenceLogitBackend(int order, uint32_t vocab_size = 1024, uint32_t context_window = 4096);

  InitResponse Init(const InitRequest& request) override;
  void Reset(uint64_t session_id) override;
  std::vector<float> Predict(uint64_t session_id, std::span<const uint8_t> new_symbols) override;
  const std::array<uint32_t, 256>& digital_token_ids() const override { return ids_; }

  // Tokenizer of the synthetic vocabulary: digit strings "0".."255" map to
  // their scattered IDs, everything else is word-tokenized into the rest.
  std::vector<TokenId> Tokenize(std::string_view text) const;

 private:
  std::unique_ptr<ProbabilityProvider> model_;
  uint32_t vocab_size_;
  uint32_t context_window_;
  std::array<uint32_t, 256> ids_{};
  std::string prompt_;
  OrderingMode mode_ = OrderingMode::kChannelJoint;
  std::unordered_map<uint64_t, std::unique_ptr<ProviderSession>> sessions_;
  int order_;
};

}  // namespace p2codec::wire

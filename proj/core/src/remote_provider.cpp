#include "p2codec/remote_provider.hpp"

#include <span>
#include <string>
#include <vector>

#include "p2codec/adaptive_model.hpp"
#include "p2codec/error.hpp"

namespace p2codec {

namespace {

class RemoteSession final : public ProviderSession {
 public:
  RemoteSession(RemoteProvider& provider, std::size_t prompt_tokens, std::size_t window, bool deterministic)
      : provider_(provider),
        id_(provider.NextSessionId()),
        prompt_tokens_(prompt_tokens),
        window_(window),
        deterministic_(deterministic) {
    provider_.Reset(id_);
  }

  Pmf256 next_pmf() override {
    if (prompt_tokens_ + history_.size() + 1 > window_) {
      throw CodecError(ErrorKind::kContextOverflow, "context exceeds the provider window of " +
                                                        std::to_string(window_) + " tokens");
    }
    if (!cached_) {
      const std::span<const uint8_t> delta(history_.data() + sent_, history_.size() - sent_);
      const wire::Logits256 logits = provider_.Predict(id_, delta);
      sent_ = history_.size();
      std::array<double, 256> widened{};
      for (std::size_t z = 0; z < 256; ++z) widened[z] = logits[z];
      cached_ = SoftmaxGathered(widened);
    }
    return *cached_;
  }

  void observe(uint8_t symbol) override {
    history_.push_back(symbol);
    cached_.reset();
  }

  std::unique_ptr<ProviderSession> clone() const override {
    auto copy = std::make_unique<RemoteSession>(provider_, prompt_tokens_, window_, deterministic_);
    copy->history_ = history_;  // replayed in full on its first PREDICT
    return copy;
  }

  std::size_t prompt_token_count() const override { return prompt_tokens_; }
  std::span<const uint8_t> history() const override { return history_; }
  bool deterministic() const override { return deterministic_; }

 private:
  RemoteProvider& provider_;
  uint64_t id_;
  std::size_t prompt_tokens_;
  std::size_t window_;
  bool deterministic_;
  std::vector<uint8_t> history_;
  std::size_t sent_ = 0;
  std::optional<Pmf256> cached_;
};

}  // namespace

RemoteProvider::RemoteProvider(std::unique_ptr<wire::Transport> transport, std::string description)
    : transport_(std::move(transport)), description_(std::move(description)) {}

wire::Message RemoteProvider::RoundTrip(const wire::Message& request) {
  wire::SendMessage(*transport_, request);
  wire::Message reply = wire::ReceiveMessage(*transport_);
  if (const auto* err = std::get_if<wire::ErrorResponse>(&reply)) throw CodecError(err->kind, err->message);
  return reply;
}

ProviderInfo RemoteProvider::Prepare(const PromptConfig& prompt, OrderingMode mode) {
  std::lock_guard lock(mu_);
  const std::string text(prompt.effective_text());
  if (!configured_ || configured_->first != text || configured_->second != mode) {
    wire::InitRequest init{.prompt_text = text,
                           .mode = mode,
                           .map_fingerprint = map_ ? map_->fingerprint() : 0,
                           .expects_deterministic = true};
    auto reply = RoundTrip(init);
    auto* ok = std::get_if<wire::InitResponse>(&reply);
    if (ok == nullptr) throw CodecError(ErrorKind::kProviderUnavailable, "unexpected reply to INIT");
    DigitalTokenMap map(ok->digital_token_ids);
    for (uint32_t id : ok->digital_token_ids) {
      if (id >= ok->vocab_size) {
        throw CodecError(ErrorKind::kCorruptProviderOutput, "digital token id outside the advertised vocabulary");
      }
    }
    init_ = *ok;
    map_ = std::move(map);
    configured_ = {text, mode};
  }
  return ProviderInfo{
      .fingerprint = init_->model_fingerprint,
      .map_fingerprint = map_->fingerprint(),
      .context_window = init_->context_window,
      .prompt_tokens = init_->prompt_tokens,
      .deterministic = init_->deterministic,
  };
}

std::unique_ptr<ProviderSession> RemoteProvider::Begin(const PromptConfig& prompt, OrderingMode mode,
                                                       std::optional<uint8_t> /*channel*/) {
  const ProviderInfo info = Prepare(prompt, mode);
  return std::make_unique<RemoteSession>(*this, info.prompt_tokens, info.context_window, info.deterministic);
}

const DigitalTokenMap& RemoteProvider::token_map() {
  std::lock_guard lock(mu_);
  if (!map_) throw CodecError(ErrorKind::kProviderUnavailable, "remote provider used before INIT");
  return *map_;
}

wire::Logits256 RemoteProvider::Predict(uint64_t session_id, std::span<const uint8_t> new_symbols) {
  std::lock_guard lock(mu_);
  wire::PredictRequest request;
  request.items.push_back({session_id, std::vector<uint8_t>(new_symbols.begin(), new_symbols.end())});
  auto reply = RoundTrip(request);
  auto* ok = std::get_if<wire::PredictResponse>(&reply);
  if (ok == nullptr || ok->logits.size() != 1) {
    throw CodecError(ErrorKind::kCorruptProviderOutput, "PREDICT reply must carry exactly one logit vector");
  }
  return ok->logits.front();
}

void RemoteProvider::Reset(uint64_t session_id) {
  std::lock_guard lock(mu_);
  auto reply = RoundTrip(wire::ResetRequest{session_id});
  if (!std::holds_alternative<wire::ResetResponse>(reply)) {
    throw CodecError(ErrorKind::kProviderUnavailable, "unexpected reply to RESET");
  }
}

std::unique_ptr<ProbabilityProvider> MakeProvider(const std::string& spec, double alpha) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "builtin") {
    if (arg.size() == 6 && arg.starts_with("order") && arg[5] >= '0' && arg[5] <= '2') {
      return std::make_unique<AdaptiveModelProvider>(arg[5] - '0', alpha);
    }
    throw CodecError(ErrorKind::kConfig, "builtin provider must be order0, order1 or order2");
  }
  if (kind == "remote" && !arg.empty()) return std::make_unique<RemoteProvider>(wire::ConnectTcp(arg), spec);
  if (kind == "exec" && !arg.empty()) return std::make_unique<RemoteProvider>(wire::SpawnProcess(arg), spec);
  throw CodecError(ErrorKind::kConfig, "unknown provider '" + spec + "'");
}

}  // namespace p2codec

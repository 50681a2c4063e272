#include "p2codec/reference_server.hpp"

#include <cmath>
#include <string>

#include "p2codec/adaptive_model.hpp"
#include "p2codec/error.hpp"

namespace p2codec::wire {

void ServeConnection(Transport& transport, LogitBackend& backend) {
  std::vector<uint8_t> payload;
  while (ReadFrame(transport, payload)) {
    Message reply;
    try {
      const Message request = DecodeMessage(payload);
      if (const auto* init = std::get_if<InitRequest>(&request)) {
        reply = backend.Init(*init);
      } else if (const auto* reset = std::get_if<ResetRequest>(&request)) {
        backend.Reset(reset->session_id);
        reply = ResetResponse{reset->session_id};
      } else if (const auto* predict = std::get_if<PredictRequest>(&request)) {
        PredictResponse response;
        const auto& ids = backend.digital_token_ids();
        for (const auto& item : predict->items) {
          const std::vector<float> full = backend.Predict(item.session_id, item.new_symbols);
          Logits256 gathered{};
          for (std::size_t z = 0; z < 256; ++z) gathered[z] = full.at(ids[z]);
          response.logits.push_back(gathered);
        }
        reply = std::move(response);
      } else {
        reply = ErrorResponse{ErrorKind::kCorruptStream, "unexpected message from client"};
      }
    } catch (const CodecError& e) {
      reply = ErrorResponse{e.kind(), e.what()};
    }
    SendMessage(transport, reply);
  }
}

ReferenceLogitBackend::ReferenceLogitBackend(int order, uint32_t vocab_size, uint32_t context_window)
    : model_(std::make_unique<AdaptiveModelProvider>(order)),
      vocab_size_(vocab_size),
      context_window_(context_window),
      order_(order) {
  if (vocab_size < 512) throw CodecError(ErrorKind::kConfig, "reference vocabulary needs at least 512 tokens");
  // 97 is odd, so z -> 97 z mod 256 is a permutation; the offset pushes the
  // digit tokens away from ID 0.
  for (uint32_t z = 0; z < 256; ++z) ids_[z] = 200 + (97 * z) % 256;
}

std::vector<TokenId> ReferenceLogitBackend::Tokenize(std::string_view text) const {
  std::vector<TokenId> out;
  for (TokenId id : IdentityVocabProbe(text)) {
    out.push_back(id < 256 ? ids_[id] : 456 + id % (vocab_size_ - 456));
  }
  return out;
}

InitResponse ReferenceLogitBackend::Init(const InitRequest& request) {
  if (request.version != kProtocolVersion) {
    throw CodecError(ErrorKind::kProviderUnavailable, "unsupported protocol version " +
                                                          std::to_string(request.version));
  }
  prompt_ = request.prompt_text;
  mode_ = request.mode;
  sessions_.clear();
  InitResponse response;
  response.vocab_size = vocab_size_;
  response.context_window = context_window_;
  response.digital_token_ids = ids_;
  const std::string tag = "reference-backend/order" + std::to_string(order_) + "/vocab" + std::to_string(vocab_size_);
  response.model_fingerprint = Fnv1a64({reinterpret_cast<const uint8_t*>(tag.data()), tag.size()});
  response.prompt_tokens = static_cast<uint32_t>(Tokenize(prompt_).size());
  response.deterministic = true;
  return response;
}

void ReferenceLogitBackend::Reset(uint64_t session_id) {
  sessions_[session_id] = model_->Begin(PromptConfig{prompt_, !prompt_.empty()}, mode_);
}

std::vector<float> ReferenceLogitBackend::Predict(uint64_t session_id, std::span<const uint8_t> new_symbols) {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    throw CodecError(ErrorKind::kProviderUnavailable, "unknown session " + std::to_string(session_id));
  }
  for (uint8_t s : new_symbols) it->second->observe(s);
  if (it->second->prompt_token_count() + it->second->history().size() + 1 > context_window_) {
    throw CodecError(ErrorKind::kContextOverflow, "session exceeds the context window");
  }
  const Pmf256 pmf = it->second->next_pmf();
  std::vector<float> logits(vocab_size_, 40.0f);
  for (std::size_t z = 0; z < 256; ++z) logits[ids_[z]] = static_cast<float>(std::log(pmf.p[z]));
  return logits;
}

}  // namespace p2codec::wire

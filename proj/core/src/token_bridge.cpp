#include "p2codec/token_bridge.hpp"

#include <cctype>
#include <charconv>
#include <string>

#include "p2codec/error.hpp"

namespace p2codec {

uint64_t Fnv1a64(std::span<const uint8_t> bytes, uint64_t seed) {
  uint64_t h = seed;
  for (uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

DigitalTokenMap::DigitalTokenMap(const std::array<TokenId, 256>& forward) : forward_(forward) {
  inverse_.reserve(256);
  std::array<uint8_t, 256 * 4> le{};
  for (int z = 0; z < 256; ++z) {
    auto [it, inserted] = inverse_.emplace(forward_[z], static_cast<uint8_t>(z));
    if (!inserted) {
      throw CodecError(ErrorKind::kTokenizerUnsuitable, "values " + std::to_string(it->second) + " and " +
                                                            std::to_string(z) + " share token id " +
                                                            std::to_string(forward_[z]));
    }
    for (int b = 0; b < 4; ++b) le[z * 4 + b] = static_cast<uint8_t>(forward_[z] >> (8 * b));
  }
  fingerprint_ = Fnv1a64(le);
}

DigitalTokenMap DigitalTokenMap::Identity() {
  std::array<TokenId, 256> ids{};
  for (TokenId z = 0; z < 256; ++z) ids[z] = z;
  return DigitalTokenMap(ids);
}

uint8_t DigitalTokenMap::inverse(TokenId id) const {
  auto it = inverse_.find(id);
  if (it == inverse_.end()) {
    throw CodecError(ErrorKind::kCorruptStream, "token id " + std::to_string(id) + " is not a digital token");
  }
  return it->second;
}

DigitalTokenMap BuildDigitalTokenMap(const TokenizerFn& vocab_probe) {
  std::array<TokenId, 256> ids{};
  for (int z = 0; z < 256; ++z) {
    const auto tokens = vocab_probe(std::to_string(z));
    if (tokens.size() != 1) {
      throw CodecError(ErrorKind::kTokenizerUnsuitable, "value " + std::to_string(z) + " tokenizes into " +
                                                            std::to_string(tokens.size()) + " tokens");
    }
    ids[z] = tokens.front();
  }
  return DigitalTokenMap(ids);
}

PromptConfig DefaultPrompt(OrderingMode mode, bool enabled) {
  const auto text = mode == OrderingMode::kChannelJoint ? kJointTaskPrompt : kIndependentTaskPrompt;
  return PromptConfig{std::string(text), enabled};
}

std::vector<TokenId> TokenizedContext::full() const {
  std::vector<TokenId> out;
  out.reserve(size());
  out.insert(out.end(), prompt_ids.begin(), prompt_ids.end());
  out.insert(out.end(), symbol_ids.begin(), symbol_ids.end());
  return out;
}

TokenizedContext TokenizeContext(const PromptConfig& prompt, const SymbolSequence& seq, const DigitalTokenMap& map,
                                 const TokenizerFn& prompt_tokenizer) {
  TokenizedContext ctx;
  if (prompt.enabled && !prompt.text.empty()) ctx.prompt_ids = prompt_tokenizer(prompt.text);
  ctx.symbol_ids.reserve(seq.symbols.size());
  for (uint8_t s : seq.symbols) ctx.symbol_ids.push_back(map.forward(s));
  return ctx;
}

std::vector<uint8_t> DetokenizeSymbols(std::span<const TokenId> ids, const DigitalTokenMap& map) {
  std::vector<uint8_t> out;
  out.reserve(ids.size());
  for (TokenId id : ids) out.push_back(map.inverse(id));
  return out;
}

std::vector<TokenId> SimpleWordTokenize(std::string_view text) {
  constexpr TokenId kBase = 256;
  constexpr TokenId kBuckets = 1u << 20;
  auto id_of = [&](std::string_view piece) {
    const auto* p = reinterpret_cast<const uint8_t*>(piece.data());
    return kBase + static_cast<TokenId>(Fnv1a64({p, piece.size()}) % kBuckets);
  };

  auto alpha = [&](std::size_t k) { return k < text.size() && std::isalpha(static_cast<unsigned char>(text[k])); };
  auto digit = [&](std::size_t k) { return k < text.size() && std::isdigit(static_cast<unsigned char>(text[k])); };
  auto space = [&](std::size_t k) { return k < text.size() && std::isspace(static_cast<unsigned char>(text[k])); };
  auto word_start = [&](std::size_t k) { return text[k] == ' ' && alpha(k + 1); };

  std::vector<TokenId> ids;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t start = i;
    if (word_start(i)) {
      ++i;
      while (alpha(i)) ++i;
    } else if (alpha(i)) {
      while (alpha(i)) ++i;
    } else if (digit(i)) {
      while (digit(i)) ++i;
    } else if (space(i)) {
      while (space(i) && !word_start(i)) ++i;
    } else {
      ++i;
    }
    ids.push_back(id_of(text.substr(start, i - start)));
  }
  return ids;
}

std::vector<TokenId> IdentityVocabProbe(std::string_view text) {
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  const bool canonical = !text.empty() && (text.size() == 1 || text[0] != '0');
  if (ec == std::errc() && ptr == text.data() + text.size() && canonical && value < 256) return {value};
  return SimpleWordTokenize(text);
}

}  // namespace p2codec

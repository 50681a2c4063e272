#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "p2codec/image.hpp"

namespace p2codec {

using TokenId = uint32_t;

// Tokenizes an arbitrary string under some provider vocabulary.
using TokenizerFn = std::function<std::vector<TokenId>(std::string_view)>;

// Bijection between the 256 subpixel values and single vocabulary tokens,
// i.e. value z <-> the token for its decimal string.
class DigitalTokenMap {
 public:
  // Throws kTokenizerUnsuitable if the IDs are not pairwise distinct.
  explicit DigitalTokenMap(const std::array<TokenId, 256>& forward);

  // Token ID == subpixel value. Used by the built-in providers.
  static DigitalTokenMap Identity();

  TokenId forward(uint8_t value) const { return forward_[value]; }
  const std::array<TokenId, 256>& forward_ids() const { return forward_; }

  // Throws kCorruptStream for an ID outside the map's range.
  uint8_t inverse(TokenId id) const;
  bool contains(TokenId id) const { return inverse_.contains(id); }

  // 64-bit FNV-1a over the 256 forward IDs, little-endian. Stored in the
  // container header to catch vocabulary mismatches at decode time.
  uint64_t fingerprint() const { return fingerprint_; }

  friend bool operator==(const DigitalTokenMap& a, const DigitalTokenMap& b) { return a.forward_ == b.forward_; }

 private:
  std::array<TokenId, 256> forward_{};
  std::unordered_map<TokenId, uint8_t> inverse_;
  uint64_t fingerprint_ = 0;
};

// Probes str(z) for z = 0..255. Every value must come back as exactly one
// token and the 256 IDs must be distinct, otherwise kTokenizerUnsuitable.
DigitalTokenMap BuildDigitalTokenMap(const TokenizerFn& vocab_probe);

struct PromptConfig {
  std::string text;
  bool enabled = false;

  // The text actually prepended; empty when disabled.
  std::string_view effective_text() const { return enabled ? std::string_view(text) : std::string_view(); }
  friend bool operator==(const PromptConfig&, const PromptConfig&) = default;
};

inline constexpr std::string_view kJointTaskPrompt =
    "Every three values denote an RGB pixel of a flattened image. "
    "Predict the next RGB pixel based on the previous pixels.";
inline constexpr std::string_view kIndependentTaskPrompt =
    "R/G/B channel of a flattened RGB image. Predict the next sub-pixel based on previous sub-pixels.";

// Default task prompt text for an ordering mode.
PromptConfig DefaultPrompt(OrderingMode mode, bool enabled = true);

struct TokenizedContext {
  std::vector<TokenId> prompt_ids;
  std::vector<TokenId> symbol_ids;

  // prompt_ids followed by symbol_ids, no separators.
  std::vector<TokenId> full() const;
  std::size_t size() const { return prompt_ids.size() + symbol_ids.size(); }
};

// Two-step tokenization: the prompt goes through the provider tokenizer once,
// symbols are mapped by direct dictionary lookup.
TokenizedContext TokenizeContext(const PromptConfig& prompt, const SymbolSequence& seq, const DigitalTokenMap& map,
                                 const TokenizerFn& prompt_tokenizer);

std::vector<uint8_t> DetokenizeSymbols(std::span<const TokenId> ids, const DigitalTokenMap& map);

// Total context length a provider must hold for one coded sequence.
inline std::size_t ContextTokenCount(std::size_t prompt_tokens, std::size_t symbol_count) {
  return prompt_tokens + symbol_count;
}

// Word-level tokenizer used by the built-in providers for prompt text: runs
// of letters (with one leading space attached), runs of digits, and single
// punctuation marks each become one token. IDs start at 256 so they never
// collide with the identity digit vocabulary.
std::vector<TokenId> SimpleWordTokenize(std::string_view text);

// Identity vocabulary probe: decimal strings "0".."255" map to their value,
// anything else is word-tokenized.
std::vector<TokenId> IdentityVocabProbe(std::string_view text);

uint64_t Fnv1a64(std::span<const uint8_t> bytes, uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace p2codec

#include <doctest.h>

#include <random>
#include <set>

#include "p2codec/error.hpp"
#include "p2codec/reference_server.hpp"
#include "p2codec/token_bridge.hpp"

using namespace p2codec;

TEST_CASE("identity vocabulary yields the identity map") {
  const auto map = BuildDigitalTokenMap(IdentityVocabProbe);
  for (int z = 0; z < 256; ++z) CHECK(map.forward(static_cast<uint8_t>(z)) == TokenId(z));
  CHECK(map == DigitalTokenMap::Identity());
}

TEST_CASE("a value that splits into several tokens is rejected") {
  auto splitting = [](std::string_view s) -> std::vector<TokenId> {
    if (s == "255") return {2, 55};
    return IdentityVocabProbe(s);
  };
  try {
    BuildDigitalTokenMap(splitting);
    FAIL("expected an error");
  } catch (const CodecError& e) {
    CHECK(e.kind() == ErrorKind::kTokenizerUnsuitable);
    CHECK(std::string(e.what()).find("value 255") != std::string::npos);
  }
}

TEST_CASE("colliding token ids are rejected") {
  // 254 and 255 share a token: the lossy one-to-two mapping.
  auto colliding = [](std::string_view s) -> std::vector<TokenId> {
    if (s == "255") return {254};
    return IdentityVocabProbe(s);
  };
  try {
    BuildDigitalTokenMap(colliding);
    FAIL("expected an error");
  } catch (const CodecError& e) {
    CHECK(e.kind() == ErrorKind::kTokenizerUnsuitable);
  }
}

TEST_CASE("scattered vocabulary probes into a valid bijection") {
  wire::ReferenceLogitBackend backend(0);
  const auto map = BuildDigitalTokenMap([&](std::string_view s) { return backend.Tokenize(s); });
  std::set<TokenId> ids(map.forward_ids().begin(), map.forward_ids().end());
  CHECK(ids.size() == 256);
  for (int z = 0; z < 256; ++z) CHECK(map.inverse(map.forward(static_cast<uint8_t>(z))) == z);
  for (TokenId id : ids) CHECK(map.forward(map.inverse(id)) == id);
  CHECK(map.fingerprint() != DigitalTokenMap::Identity().fingerprint());
}

TEST_CASE("tokenize_context maps symbols by lookup and prompts through the tokenizer") {
  const auto map = DigitalTokenMap::Identity();
  SymbolSequence seq{{10, 255}, OrderingMode::kChannelJoint, {}};

  const auto empty = TokenizeContext(PromptConfig{}, seq, map, SimpleWordTokenize);
  CHECK(empty.prompt_ids.empty());
  CHECK(empty.symbol_ids == std::vector<TokenId>{10, 255});

  const auto disabled = TokenizeContext(DefaultPrompt(OrderingMode::kChannelJoint, false), seq, map, SimpleWordTokenize);
  CHECK(disabled.prompt_ids.empty());

  const auto with_prompt = TokenizeContext(DefaultPrompt(OrderingMode::kChannelJoint), seq, map, SimpleWordTokenize);
  CHECK(with_prompt.prompt_ids.size() == 23);
  CHECK(with_prompt.symbol_ids == std::vector<TokenId>{10, 255});
  const auto full = with_prompt.full();
  CHECK(full.size() == 25);
  CHECK(full[23] == 10);
}

TEST_CASE("word tokenizer splits the task prompts as documented") {
  // Every| three| values| denote| an| RGB| pixel| of| a| flattened| image|.
  // | Predict| the| next| RGB| pixel| based| on| the| previous| pixels|.
  CHECK(SimpleWordTokenize(kJointTaskPrompt).size() == 23);
  CHECK(SimpleWordTokenize("").empty());
  CHECK(SimpleWordTokenize("R/G").size() == 3);
  const auto a = SimpleWordTokenize(" pixel");
  const auto b = SimpleWordTokenize("pixel");
  REQUIRE(a.size() == 1);
  CHECK(a != b);
}

TEST_CASE("context length accounting matches the published token totals") {
  // A 19-token prompt plus 3 * side^2 subpixel tokens.
  CHECK(ContextTokenCount(19, 8 * 8 * 3) == 211);
  CHECK(ContextTokenCount(19, 12 * 12 * 3) == 451);
  CHECK(ContextTokenCount(19, 16 * 16 * 3) == 787);
  CHECK(ContextTokenCount(19, 24 * 24 * 3) == 1747);
  CHECK(ContextTokenCount(19, 32 * 32 * 3) == 3091);
}

TEST_CASE("default prompts per ordering mode") {
  CHECK(DefaultPrompt(OrderingMode::kChannelJoint).text ==
        "Every three values denote an RGB pixel of a flattened image. Predict the next RGB pixel based on the "
        "previous pixels.");
  CHECK(DefaultPrompt(OrderingMode::kChannelIndependent).text ==
        "R/G/B channel of a flattened RGB image. Predict the next sub-pixel based on previous sub-pixels.");
  CHECK(DefaultPrompt(OrderingMode::kChannelJoint, false).effective_text().empty());
}

TEST_CASE("detokenize inverts the symbol half and rejects unknown ids") {
  wire::ReferenceLogitBackend backend(0);
  const auto map = BuildDigitalTokenMap([&](std::string_view s) { return backend.Tokenize(s); });
  CHECK(DetokenizeSymbols(std::vector<TokenId>{10, 255}, DigitalTokenMap::Identity()) ==
        std::vector<uint8_t>{10, 255});

  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int trial = 0; trial < 50; ++trial) {
    SymbolSequence seq;
    seq.symbols.resize(768);
    for (auto& s : seq.symbols) s = static_cast<uint8_t>(byte(rng));
    const auto ctx = TokenizeContext(DefaultPrompt(OrderingMode::kChannelJoint), seq, map,
                                     [&](std::string_view s) { return backend.Tokenize(s); });
    CHECK(ctx.symbol_ids.size() == seq.symbols.size());
    CHECK(DetokenizeSymbols(ctx.symbol_ids, map) == seq.symbols);
  }

  try {
    DetokenizeSymbols(std::vector<TokenId>{5}, map);
    FAIL("expected an error");
  } catch (const CodecError& e) {
    CHECK(e.kind() == ErrorKind::kCorruptStream);
  }
}

#include "p2codec/provider.hpp"

#include <cmath>

#include "p2codec/error.hpp"

namespace p2codec {

namespace {

double SequenceLogProbability(ProbabilityProvider& provider, const PromptConfig& prompt,
                              std::span<const uint8_t> symbols) {
  auto session = provider.Begin(prompt, OrderingMode::kChannelJoint);
  double log_p = 0.0;
  for (uint8_t s : symbols) {
    log_p += std::log(session->next_pmf().p[s]);
    session->observe(s);
  }
  return log_p;
}

}  // namespace

FactorizationResult JointConditionalFactorizationCheck(ProbabilityProvider& provider,
                                                       std::span<const uint8_t> pixel_context,
                                                       const std::array<uint8_t, 3>& pixel,
                                                       const PromptConfig& prompt) {
  const ProviderInfo info = provider.Prepare(prompt, OrderingMode::kChannelJoint);
  if (!info.deterministic) {
    throw CodecError(ErrorKind::kUnsupportedCheck, "factorization check needs a deterministic provider");
  }

  auto session = provider.Begin(prompt, OrderingMode::kChannelJoint);
  for (uint8_t s : pixel_context) session->observe(s);
  auto replay = session->clone();

  auto chain = [&pixel](ProviderSession& s) {
    double product = 1.0;
    for (uint8_t v : pixel) {
      product *= s.next_pmf().p[v];
      s.observe(v);
    }
    return product;
  };

  FactorizationResult result;
  result.product_of_conditionals = chain(*session);
  result.joint = chain(*replay);

  std::vector<uint8_t> full(pixel_context.begin(), pixel_context.end());
  full.insert(full.end(), pixel.begin(), pixel.end());
  result.sequence_ratio = std::exp(SequenceLogProbability(provider, prompt, full) -
                                   SequenceLogProbability(provider, prompt, pixel_context));
  return result;
}

}  // namespace p2codec

#include "p2codec/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "p2codec/error.hpp"

namespace p2codec {

Pmf256 Pmf256::Uniform() {
  Pmf256 pmf;
  pmf.p.fill(1.0 / 256.0);
  return pmf;
}

double Pmf256::sum() const {
  double s = 0.0;
  for (double v : p) s += v;
  return s;
}

std::size_t Pmf256::argmax() const {
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

bool Pmf256::valid(double tolerance) const {
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) return false;
  }
  return std::abs(sum() - 1.0) <= tolerance;
}

Pmf256 SoftmaxGathered(std::span<const double, 256> logits) {
  double max_logit = -INFINITY;
  for (double y : logits) {
    if (!std::isfinite(y)) throw CodecError(ErrorKind::kCorruptProviderOutput, "non-finite logit");
    max_logit = std::max(max_logit, y);
  }
  Pmf256 pmf;
  double total = 0.0;
  for (std::size_t z = 0; z < 256; ++z) {
    pmf.p[z] = std::exp(logits[z] - max_logit);
    total += pmf.p[z];
  }
  for (double& v : pmf.p) v /= total;
  return pmf;
}

Pmf256 SampleDistribution(const LogitVector& logits, const DigitalTokenMap& map) {
  std::array<double, 256> gathered{};
  for (std::size_t z = 0; z < 256; ++z) {
    const TokenId id = map.forward(static_cast<uint8_t>(z));
    if (id >= logits.values.size()) {
      throw CodecError(ErrorKind::kCorruptProviderOutput,
                       "digital token id " + std::to_string(id) + " outside logit vector of size " +
                           std::to_string(logits.values.size()));
    }
    gathered[z] = logits.values[id];
  }
  return SoftmaxGathered(gathered);
}

}  // namespace p2codec

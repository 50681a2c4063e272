#include "p2codec/range_coder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "p2codec/error.hpp"

namespace p2codec {

namespace {

constexpr uint64_t kWindow = uint64_t{1} << 32;
constexpr uint64_t kWindowMask = kWindow - 1;
constexpr uint64_t kRenormThreshold = uint64_t{1} << 24;

void CheckPrecision(unsigned precision) {
  if (precision < kMinCdfPrecision || precision > kMaxCdfPrecision) {
    throw CodecError(ErrorKind::kConfig, "cdf precision " + std::to_string(precision) + " outside [" +
                                             std::to_string(kMinCdfPrecision) + ", " +
                                             std::to_string(kMaxCdfPrecision) + "]");
  }
}

// Fewest leading bits b such that the whole block [v, v + 2^(32-b)) of some
// multiple v of 2^(32-b) lies in [low, low + range). Any continuation of
// those b bits stays inside the interval, so no valid stream is a prefix of
// another. Returns b and v (possibly >= 2^32).
std::pair<unsigned, uint64_t> FlushPoint(uint64_t low, uint64_t range) {
  for (unsigned b = 0; b <= 32; ++b) {
    const uint64_t step = uint64_t{1} << (32 - b);
    const uint64_t v = (low + step - 1) / step * step;
    if (v + step <= low + range) return {b, v};
  }
  return {32, low};  // unreachable: range >= 2^24
}

}  // namespace

bool QuantizedCdf::valid() const {
  if (precision < kMinCdfPrecision || precision > kMaxCdfPrecision) return false;
  if (c[0] != 0 || c[256] != (uint32_t{1} << precision)) return false;
  for (std::size_t z = 0; z < 256; ++z) {
    if (c[z + 1] <= c[z]) return false;
  }
  return true;
}

QuantizedCdf QuantizeCdf(const Pmf256& pmf, unsigned precision) {
  CheckPrecision(precision);
  const uint32_t total = uint32_t{1} << precision;
  const uint32_t spread = total - 256;  // mass left after the floor of 1

  double sum = 0.0;
  for (double v : pmf.p) {
    if (!std::isfinite(v) || v < 0.0) throw CodecError(ErrorKind::kCorruptProviderOutput, "invalid pmf entry");
    sum += v;
  }
  if (!(sum > 0.0)) throw CodecError(ErrorKind::kCorruptProviderOutput, "pmf has no mass");

  std::array<uint32_t, 256> share{};
  std::array<double, 256> remainder{};
  int64_t assigned = 0;
  for (std::size_t z = 0; z < 256; ++z) {
    const double ideal = pmf.p[z] / sum * spread;
    // Truncation is floor here: ideal is non-negative.
    const auto whole = std::min(static_cast<uint32_t>(ideal), spread);
    share[z] = whole;
    remainder[z] = ideal - whole;
    assigned += share[z];
  }

  std::array<uint8_t, 256> order{};
  std::iota(order.begin(), order.end(), 0);
  int64_t deficit = int64_t{spread} - assigned;
  if (deficit > 0) {
    // Remainders are below 1, so fewer than 256 units are ever missing.
    const auto k = static_cast<std::ptrdiff_t>(std::min<int64_t>(deficit, 256));
    // The order is total (index breaks ties), so the top k set is unique.
    std::nth_element(order.begin(), order.begin() + (k - 1), order.end(), [&](uint8_t a, uint8_t b) {
      return remainder[a] != remainder[b] ? remainder[a] > remainder[b] : a < b;
    });
    for (std::ptrdiff_t i = 0; i < k; ++i) ++share[order[i]];
  } else if (deficit < 0) {
    // Rounding in `sum` can over-assign by a unit or two; take it back from
    // the smallest remainders.
    std::stable_sort(order.begin(), order.end(),
                     [&](uint8_t a, uint8_t b) { return remainder[a] < remainder[b]; });
    for (std::size_t i = 0; deficit < 0; i = (i + 1) % 256) {
      if (share[order[i]] > 0) {
        --share[order[i]];
        ++deficit;
      }
    }
  }

  QuantizedCdf cdf;
  cdf.precision = precision;
  for (std::size_t z = 0; z < 256; ++z) cdf.c[z + 1] = cdf.c[z] + 1 + share[z];
  return cdf;
}

bool Bitstream::well_formed() const {
  if (bytes.size() != ByteLength(bit_length)) return false;
  const unsigned tail = static_cast<unsigned>(bit_length % 8);
  if (tail != 0 && (bytes.back() & ((1u << (8 - tail)) - 1)) != 0) return false;
  return true;
}

double IdealCodeLengthBits(const QuantizedCdf& cdf, uint8_t symbol) {
  return double(cdf.precision) - std::log2(double(cdf.gap(symbol)));
}

void RangeEncoder::PropagateCarry() {
  for (auto it = out_.rbegin(); it != out_.rend(); ++it) {
    if (++*it != 0) return;
  }
}

void RangeEncoder::Encode(const QuantizedCdf& cdf, uint8_t symbol) {
  const unsigned p = cdf.precision;
  const uint64_t lo = (range_ * cdf.c[symbol]) >> p;
  const uint64_t hi = (range_ * cdf.c[symbol + 1]) >> p;
  low_ += lo;
  range_ = hi - lo;
  if (low_ >= kWindow) {
    PropagateCarry();
    low_ &= kWindowMask;
  }
  while (range_ < kRenormThreshold) {
    out_.push_back(static_cast<uint8_t>(low_ >> 24));
    low_ = (low_ << 8) & kWindowMask;
    range_ <<= 8;
  }
}

Bitstream RangeEncoder::Finish() {
  auto [bits, v] = FlushPoint(low_, range_);
  if (v >= kWindow) {
    PropagateCarry();
    v &= kWindowMask;
  }
  Bitstream stream;
  stream.bit_length = uint64_t{out_.size()} * 8 + bits;
  for (unsigned emitted = 0; emitted < bits; emitted += 8) {
    out_.push_back(static_cast<uint8_t>(v >> (24 - emitted)));
  }
  stream.bytes = std::move(out_);
  out_.clear();
  low_ = 0;
  range_ = kWindow;
  return stream;
}

RangeDecoder::RangeDecoder(const Bitstream& bits) : bits_(bits) {
  if (!bits.well_formed()) throw CodecError(ErrorKind::kCorruptStream, "bitstream byte length or padding invalid");
  for (int i = 0; i < 4; ++i) window_ = (window_ << 8) | NextByte();
}

uint8_t RangeDecoder::NextByte() {
  return pos_ < bits_.bytes.size() ? bits_.bytes[pos_++] : (++pos_, 0);
}

uint8_t RangeDecoder::Decode(const QuantizedCdf& cdf) {
  const unsigned p = cdf.precision;
  const uint64_t offset = (window_ - low_) & kWindowMask;
  if (offset >= range_) throw CodecError(ErrorKind::kCorruptStream, "code value outside the coding interval");

  // Largest symbol whose lower bound does not exceed the offset.
  std::size_t first = 0;
  std::size_t count = 256;
  while (count > 1) {
    const std::size_t half = count / 2;
    if (((range_ * cdf.c[first + half]) >> p) <= offset) {
      first += half;
      count -= half;
    } else {
      count = half;
    }
  }
  const auto symbol = static_cast<uint8_t>(first);
  const uint64_t lo = (range_ * cdf.c[symbol]) >> p;
  const uint64_t hi = (range_ * cdf.c[symbol + 1]) >> p;
  low_ = (low_ + lo) & kWindowMask;
  range_ = hi - lo;
  while (range_ < kRenormThreshold) {
    if (++shifted_bytes_ > bits_.bytes.size()) {
      throw CodecError(ErrorKind::kCorruptStream, "bitstream exhausted");
    }
    window_ = ((window_ << 8) | NextByte()) & kWindowMask;
    low_ = (low_ << 8) & kWindowMask;
    range_ <<= 8;
  }
  return symbol;
}

void RangeDecoder::Finish() const {
  const auto [tail_bits, v] = FlushPoint(low_, range_);
  const uint64_t expected = shifted_bytes_ * 8 + tail_bits;
  if (expected != bits_.bit_length) {
    throw CodecError(ErrorKind::kCorruptStream, "bitstream holds " + std::to_string(bits_.bit_length) +
                                                    " bits, decoded symbols account for " + std::to_string(expected));
  }
  // The tail must be exactly what the encoder flushes for these symbols.
  if (window_ != (v & kWindowMask)) throw CodecError(ErrorKind::kCorruptStream, "bitstream tail is not canonical");
}

Bitstream EncodeSymbols(std::span<const uint8_t> symbols, const CdfSource& cdf_source) {
  RangeEncoder encoder;
  for (std::size_t i = 0; i < symbols.size(); ++i) encoder.Encode(cdf_source(i), symbols[i]);
  return encoder.Finish();
}

std::vector<uint8_t> DecodeSymbols(const Bitstream& bits, std::size_t count, const CdfSource& cdf_source) {
  RangeDecoder decoder(bits);
  std::vector<uint8_t> symbols;
  symbols.reserve(count);
  for (std::size_t i = 0; i < count; ++i) symbols.push_back(decoder.Decode(cdf_source(i)));
  decoder.Finish();
  return symbols;
}

}  // namespace p2codec

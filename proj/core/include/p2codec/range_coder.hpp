#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "p2codec/pmf.hpp"

namespace p2codec {

inline constexpr unsigned kDefaultCdfPrecision = 16;
inline constexpr unsigned kMinCdfPrecision = 8;
inline constexpr unsigned kMaxCdfPrecision = 24;

// Fixed-point cumulative distribution: c[0] = 0, c[256] = 2^precision and
// every symbol has a gap of at least 1.
struct QuantizedCdf {
  std::array<uint32_t, 257> c{};
  unsigned precision = kDefaultCdfPrecision;

  uint32_t gap(uint8_t symbol) const { return c[symbol + 1] - c[symbol]; }
  uint32_t total() const { return c[256]; }
  bool valid() const;

  friend bool operator==(const QuantizedCdf&, const QuantizedCdf&) = default;
};

// Largest-remainder apportionment of 2^precision with a floor of 1 per
// symbol; ties go to the lower symbol. Throws kConfig for precision outside
// [8, 24].
QuantizedCdf QuantizeCdf(const Pmf256& pmf, unsigned precision = kDefaultCdfPrecision);

// MSB-first packed bits; the pad bits of the last byte are zero.
struct Bitstream {
  std::vector<uint8_t> bytes;
  uint64_t bit_length = 0;

  static std::size_t ByteLength(uint64_t bits) { return static_cast<std::size_t>((bits + 7) / 8); }
  bool well_formed() const;

  friend bool operator==(const Bitstream&, const Bitstream&) = default;
};

// Range coder with a 32-bit window, byte-wise renormalization and carry
// propagation into already emitted bytes. Interval splits use the exact
// product range * c / 2^precision, so the only loss versus the ideal code
// length is the final flush (at most 9 bits plus rounding).
class RangeEncoder {
 public:
  RangeEncoder() = default;

  void Encode(const QuantizedCdf& cdf, uint8_t symbol);
  // Emits the shortest tail that pins the final interval.
  Bitstream Finish();

 private:
  void PropagateCarry();

  std::vector<uint8_t> out_;
  uint64_t low_ = 0;
  uint64_t range_ = uint64_t{1} << 32;
};

class RangeDecoder {
 public:
  // The stream must be well formed; kCorruptStream otherwise.
  explicit RangeDecoder(const Bitstream& bits);

  uint8_t Decode(const QuantizedCdf& cdf);
  // Verifies the stream length is exactly what the encoder would have
  // produced for the decoded symbols. Throws kCorruptStream otherwise.
  void Finish() const;

 private:
  uint8_t NextByte();

  const Bitstream& bits_;
  std::size_t pos_ = 0;
  uint64_t shifted_bytes_ = 0;
  uint64_t low_ = 0;
  uint64_t range_ = uint64_t{1} << 32;
  uint64_t window_ = 0;
};

// CDF used for symbol i, produced from symbols 0..i-1.
using CdfSource = std::function<QuantizedCdf(std::size_t index)>;

Bitstream EncodeSymbols(std::span<const uint8_t> symbols, const CdfSource& cdf_source);
std::vector<uint8_t> DecodeSymbols(const Bitstream& bits, std::size_t count, const CdfSource& cdf_source);

// Sum of -log2(gap / 2^precision): the ideal code length under the
// quantized model.
double IdealCodeLengthBits(const QuantizedCdf& cdf, uint8_t symbol);

}  // namespace p2codec

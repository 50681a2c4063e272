#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "p2codec/image.hpp"
#include "p2codec/provider.hpp"
#include "p2codec/range_coder.hpp"
#include "p2codec/token_bridge.hpp"

namespace p2codec {

inline constexpr std::array<uint8_t, 4> kContainerMagic = {'P', '2', 'L', 'C'};
inline constexpr uint8_t kContainerVersion = 1;
inline constexpr uint32_t kDefaultPatchSize = 16;

// On-disk layout, all integers little-endian:
//   magic "P2LC" | version u8 | width u32 | height u32 | channels u8
//   | patch_w u16 | patch_h u16 | ordering u8 | cdf precision u8
//   | provider fingerprint u64 | token-map fingerprint u64
//   | prompt length u32 | prompt UTF-8 (empty when disabled)
//   | patch count u32 | bit length u32 per coded sequence
//   | payloads
// Under channel-independent ordering each patch holds one sequence per
// channel, in R, G, B order. Symbol tokens are packed without separators.
struct ContainerHeader {
  uint8_t version = kContainerVersion;
  uint32_t width = 0;
  uint32_t height = 0;
  uint8_t channels = 0;
  uint16_t patch_w = 0;
  uint16_t patch_h = 0;
  OrderingMode mode = OrderingMode::kChannelJoint;
  uint8_t precision = kDefaultCdfPrecision;
  uint64_t provider_fingerprint = 0;
  uint64_t map_fingerprint = 0;
  std::string prompt;
  uint32_t patch_count = 0;
  std::vector<uint32_t> bit_lengths;

  std::size_t sequences_per_patch() const { return SequencesPerPatch(mode, channels); }
  PromptConfig prompt_config() const { return PromptConfig{prompt, !prompt.empty()}; }
  std::size_t payload_bytes() const;

  friend bool operator==(const ContainerHeader&, const ContainerHeader&) = default;
};

std::vector<uint8_t> SerializeHeader(const ContainerHeader& header);
// Parses and validates a header; `consumed` receives its byte length.
// Throws kCorruptContainer.
ContainerHeader ParseHeader(std::span<const uint8_t> bytes, std::size_t* consumed = nullptr);

struct CompressedContainer {
  ContainerHeader header;
  std::vector<uint8_t> payload;  // per-sequence bitstreams, whole bytes each

  std::vector<uint8_t> Serialize() const;
  static CompressedContainer Parse(std::span<const uint8_t> bytes);

  uint64_t payload_bits() const;
  uint64_t total_bits() const;
  // Bitstream of coded sequence `index` (patch-major, channel-minor).
  Bitstream sequence(std::size_t index) const;
};

struct CodecConfig {
  OrderingMode mode = OrderingMode::kChannelJoint;
  uint32_t patch_w = kDefaultPatchSize;
  uint32_t patch_h = kDefaultPatchSize;
  PromptConfig prompt;
  unsigned precision = kDefaultCdfPrecision;
  unsigned workers = 1;
};

// How patches are spread over workers: worker w handles patches
// w, w + workers, w + 2 * workers, ... Results are assembled in raster order
// regardless of completion order.
struct ExecutionPlan {
  unsigned workers = 1;
  std::vector<std::vector<std::size_t>> assignment;
};

ExecutionPlan SchedulePatches(std::size_t patch_count, unsigned worker_budget);

// Runs task(i) for every patch index according to the plan. The first
// exception thrown by any task is rethrown after all workers stop.
void RunPlan(const ExecutionPlan& plan, const std::function<void(std::size_t)>& task);

// Codes one flattened sequence with a fresh provider session.
Bitstream EncodeSequence(ProbabilityProvider& provider, const CodecConfig& config, const SymbolSequence& seq);
std::vector<uint8_t> DecodeSequence(ProbabilityProvider& provider, const PromptConfig& prompt, OrderingMode mode,
                                    std::optional<uint8_t> channel, unsigned precision, const Bitstream& bits,
                                    std::size_t count);

CompressedContainer Compress(const ImageBuffer& image, ProbabilityProvider& provider, const CodecConfig& config);
ImageBuffer Decompress(const CompressedContainer& container, ProbabilityProvider& provider, unsigned workers = 1);

}  // namespace p2codec

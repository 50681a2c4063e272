#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "p2codec/container.hpp"
#include "p2codec/image.hpp"
#include "p2codec/provider.hpp"

namespace p2codec {

// Bits per subpixel. Throws kInvalidInput for a zero-area image.
double Bpsp(uint64_t bits, uint32_t width, uint32_t height, uint32_t channels);

struct NamedImage {
  std::string id;
  ImageBuffer image;
};

struct NamedProvider {
  std::string name;
  ProbabilityProvider* provider = nullptr;
};

struct BenchRow {
  std::string image_id;
  std::string config;
  double payload_bpsp = 0.0;
  double total_bpsp = 0.0;
  double encode_seconds = 0.0;
  double decode_seconds = 0.0;
  bool lossless = false;
  bool available = true;  // false for external codecs missing on the host
};

// Published reference bpsp of the fine-tuned 8B model. Carried in reports
// for context; nothing is asserted against them.
struct ReferenceValue {
  std::string label;
  double bpsp;
};

const std::vector<ReferenceValue>& PublishedReferenceValues();

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<BenchRow> external_rows;

  // Every available row, internal and external, round-tripped exactly.
  bool valid() const;

  struct Aggregate {
    std::string config;
    double mean_payload_bpsp = 0.0;
    double mean_total_bpsp = 0.0;
    std::size_t count = 0;
  };
  std::vector<Aggregate> aggregates() const;

  std::string ToCsv() const;
  // Human-readable summary: one line per config mean, ordered like the
  // ordering x prompt ablation table, then the reference values.
  std::string ToTable() const;
};

struct AblationGrid {
  std::vector<OrderingMode> modes = {OrderingMode::kChannelIndependent, OrderingMode::kChannelJoint};
  std::vector<bool> prompts = {false, true};
  uint32_t patch_w = kDefaultPatchSize;
  uint32_t patch_h = kDefaultPatchSize;
  unsigned precision = kDefaultCdfPrecision;
  unsigned workers = 1;
};

std::string ConfigLabel(const std::string& provider, OrderingMode mode, bool prompt);

// Every (image, provider, mode, prompt) cell is compressed once as warm-up,
// then timed through a full compress/decompress round trip. Throws
// kHarnessFailure naming the cell if any round trip is not exact.
BenchReport RunAblation(const std::vector<NamedImage>& corpus, const std::vector<NamedProvider>& providers,
                        const AblationGrid& grid);

struct TraceRecord {
  std::size_t sequence = 0;  // channel index under channel-independent ordering
  std::size_t position = 0;
  uint8_t symbol = 0;
  std::size_t argmax = 0;
  double neg_log2_p = 0.0;  // under the provider's pmf
  double neg_log2_q = 0.0;  // under the quantized cdf the coder uses
  Pmf256 pmf;
};

struct DistributionTrace {
  std::vector<TraceRecord> records;
  uint64_t coded_bits = 0;  // actual range-coded length of the patch

  double ideal_bits() const;
  std::string ToCsv() const;
};

DistributionTrace DumpDistributionTrace(const ImageBuffer& image, ProbabilityProvider& provider,
                                        std::size_t patch_index, const CodecConfig& config);

// External encoder invoked through the shell. Placeholders: {in} input PPM/PGM,
// {out} encoded file, {dec} decoded PPM/PGM. Without a decode command the row
// cannot be verified and therefore is not lossless.
struct ExternalCodec {
  std::string name;
  std::string binary;  // looked up on PATH before running anything
  std::string encode_command;
  std::string decode_command;
  std::string extension;
};

std::vector<ExternalCodec> DefaultExternalCodecs();
bool BinaryOnPath(const std::string& binary);

std::vector<BenchRow> CompareExternal(const std::vector<NamedImage>& corpus, const std::vector<ExternalCodec>& codecs,
                                      std::vector<std::string>* warnings = nullptr);

// Loads every .ppm/.pgm/.png file of a directory, sorted by name.
std::vector<NamedImage> LoadCorpus(const std::filesystem::path& dir);

}  // namespace p2codec

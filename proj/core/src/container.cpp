#include "p2codec/container.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "p2codec/error.hpp"

namespace p2codec {

namespace {

void PutU16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
}
void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void PutU64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const uint8_t> in) : in_(in) {}

  uint64_t Uint(int bytes) {
    Need(bytes);
    uint64_t v = 0;
    for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | in_[pos_ + i];
    pos_ += bytes;
    return v;
  }
  std::span<const uint8_t> Bytes(std::size_t n) {
    Need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void Need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw CodecError(ErrorKind::kCorruptContainer, "truncated container header");
  }

  std::span<const uint8_t> in_;
  std::size_t pos_ = 0;
};

[[noreturn]] void Corrupt(const std::string& what) { throw CodecError(ErrorKind::kCorruptContainer, what); }

void ValidateConfig(const CodecConfig& config) {
  if (config.precision < kMinCdfPrecision || config.precision > kMaxCdfPrecision) {
    throw CodecError(ErrorKind::kConfig, "cdf precision must be in [8, 24]");
  }
  constexpr uint32_t kMaxPatch = std::numeric_limits<uint16_t>::max();
  if (config.patch_w == 0 || config.patch_h == 0 || config.patch_w > kMaxPatch || config.patch_h > kMaxPatch) {
    throw CodecError(ErrorKind::kConfig, "patch dimensions must be in [1, 65535]");
  }
  if (config.workers == 0) throw CodecError(ErrorKind::kConfig, "worker budget must be >= 1");
}

}  // namespace

std::size_t ContainerHeader::payload_bytes() const {
  std::size_t total = 0;
  for (uint32_t bits : bit_lengths) total += Bitstream::ByteLength(bits);
  return total;
}

std::vector<uint8_t> SerializeHeader(const ContainerHeader& h) {
  std::vector<uint8_t> out(kContainerMagic.begin(), kContainerMagic.end());
  out.push_back(h.version);
  PutU32(out, h.width);
  PutU32(out, h.height);
  out.push_back(h.channels);
  PutU16(out, h.patch_w);
  PutU16(out, h.patch_h);
  out.push_back(static_cast<uint8_t>(h.mode));
  out.push_back(h.precision);
  PutU64(out, h.provider_fingerprint);
  PutU64(out, h.map_fingerprint);
  PutU32(out, static_cast<uint32_t>(h.prompt.size()));
  out.insert(out.end(), h.prompt.begin(), h.prompt.end());
  PutU32(out, h.patch_count);
  for (uint32_t bits : h.bit_lengths) PutU32(out, bits);
  return out;
}

ContainerHeader ParseHeader(std::span<const uint8_t> bytes, std::size_t* consumed) {
  HeaderReader r(bytes);
  const auto magic = r.Bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kContainerMagic.begin())) Corrupt("bad magic, not a .p2lc container");

  ContainerHeader h;
  h.version = static_cast<uint8_t>(r.Uint(1));
  if (h.version != kContainerVersion) Corrupt("unsupported container version " + std::to_string(h.version));
  h.width = static_cast<uint32_t>(r.Uint(4));
  h.height = static_cast<uint32_t>(r.Uint(4));
  h.channels = static_cast<uint8_t>(r.Uint(1));
  h.patch_w = static_cast<uint16_t>(r.Uint(2));
  h.patch_h = static_cast<uint16_t>(r.Uint(2));
  const auto mode = OrderingModeFromTag(static_cast<uint8_t>(r.Uint(1)));
  if (!mode) Corrupt("unknown ordering mode");
  h.mode = *mode;
  h.precision = static_cast<uint8_t>(r.Uint(1));
  h.provider_fingerprint = r.Uint(8);
  h.map_fingerprint = r.Uint(8);
  const auto prompt = r.Bytes(static_cast<std::size_t>(r.Uint(4)));
  h.prompt.assign(prompt.begin(), prompt.end());
  h.patch_count = static_cast<uint32_t>(r.Uint(4));

  if (h.width == 0 || h.height == 0) Corrupt("zero image dimension");
  if (h.channels != 1 && h.channels != 3) Corrupt("channels must be 1 or 3");
  if (h.patch_w == 0 || h.patch_h == 0) Corrupt("zero patch dimension");
  if (h.precision < kMinCdfPrecision || h.precision > kMaxCdfPrecision) Corrupt("cdf precision out of range");
  if (h.patch_count != PatchCount(h.width, h.height, h.patch_w, h.patch_h)) {
    Corrupt("patch count does not match the image geometry");
  }

  const std::size_t sequences = std::size_t{h.patch_count} * h.sequences_per_patch();
  if ((bytes.size() - r.pos()) / 4 < sequences) Corrupt("truncated bit length table");
  h.bit_lengths.reserve(sequences);
  for (std::size_t i = 0; i < sequences; ++i) h.bit_lengths.push_back(static_cast<uint32_t>(r.Uint(4)));
  if (consumed != nullptr) *consumed = r.pos();
  return h;
}

std::vector<uint8_t> CompressedContainer::Serialize() const {
  std::vector<uint8_t> out = SerializeHeader(header);
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

CompressedContainer CompressedContainer::Parse(std::span<const uint8_t> bytes) {
  std::size_t consumed = 0;
  CompressedContainer c;
  c.header = ParseHeader(bytes, &consumed);
  const std::size_t remaining = bytes.size() - consumed;
  if (remaining != c.header.payload_bytes()) {
    Corrupt("payload holds " + std::to_string(remaining) + " bytes, header bit lengths need " +
            std::to_string(c.header.payload_bytes()));
  }
  c.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(consumed), bytes.end());
  return c;
}

uint64_t CompressedContainer::payload_bits() const {
  uint64_t bits = 0;
  for (uint32_t b : header.bit_lengths) bits += b;
  return bits;
}

uint64_t CompressedContainer::total_bits() const {
  return uint64_t{SerializeHeader(header).size() + payload.size()} * 8;
}

Bitstream CompressedContainer::sequence(std::size_t index) const {
  std::size_t offset = 0;
  for (std::size_t i = 0; i < index; ++i) offset += Bitstream::ByteLength(header.bit_lengths.at(i));
  Bitstream bits;
  bits.bit_length = header.bit_lengths.at(index);
  const std::size_t len = Bitstream::ByteLength(bits.bit_length);
  if (offset + len > payload.size()) Corrupt("payload shorter than its bit lengths");
  bits.bytes.assign(payload.begin() + static_cast<std::ptrdiff_t>(offset),
                    payload.begin() + static_cast<std::ptrdiff_t>(offset + len));
  return bits;
}

ExecutionPlan SchedulePatches(std::size_t patch_count, unsigned worker_budget) {
  if (worker_budget == 0) throw CodecError(ErrorKind::kConfig, "worker budget must be >= 1");
  ExecutionPlan plan;
  plan.workers = static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(worker_budget, patch_count)));
  plan.assignment.resize(plan.workers);
  for (std::size_t i = 0; i < patch_count; ++i) plan.assignment[i % plan.workers].push_back(i);
  return plan;
}

void RunPlan(const ExecutionPlan& plan, const std::function<void(std::size_t)>& task) {
  if (plan.workers <= 1) {
    for (const auto& list : plan.assignment) {
      for (std::size_t i : list) task(i);
    }
    return;
  }

  std::mutex mu;
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> threads;
    threads.reserve(plan.workers);
    for (const auto& list : plan.assignment) {
      threads.emplace_back([&, &list = list] {
        for (std::size_t i : list) {
          if (failed.load()) return;
          try {
            task(i);
          } catch (...) {
            std::lock_guard lock(mu);
            if (!first_error) first_error = std::current_exception();
            failed.store(true);
            return;
          }
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

Bitstream EncodeSequence(ProbabilityProvider& provider, const CodecConfig& config, const SymbolSequence& seq) {
  auto session = provider.Begin(config.prompt, config.mode, seq.channel);
  RangeEncoder encoder;
  for (uint8_t s : seq.symbols) {
    encoder.Encode(QuantizeCdf(session->next_pmf(), config.precision), s);
    session->observe(s);
  }
  return encoder.Finish();
}

std::vector<uint8_t> DecodeSequence(ProbabilityProvider& provider, const PromptConfig& prompt, OrderingMode mode,
                                    std::optional<uint8_t> channel, unsigned precision, const Bitstream& bits,
                                    std::size_t count) {
  auto session = provider.Begin(prompt, mode, channel);
  RangeDecoder decoder(bits);
  std::vector<uint8_t> symbols;
  symbols.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const uint8_t s = decoder.Decode(QuantizeCdf(session->next_pmf(), precision));
    session->observe(s);
    symbols.push_back(s);
  }
  decoder.Finish();
  return symbols;
}

CompressedContainer Compress(const ImageBuffer& image, ProbabilityProvider& provider, const CodecConfig& config) {
  ValidateConfig(config);
  if (image.empty()) throw CodecError(ErrorKind::kInvalidInput, "cannot compress an empty image");

  const ProviderInfo info = provider.Prepare(config.prompt, config.mode);
  if (!info.deterministic) {
    throw CodecError(ErrorKind::kConfig, "provider " + provider.describe() + " is not deterministic");
  }
  const std::size_t longest = std::size_t{std::min(config.patch_w, image.width())} *
                              std::min(config.patch_h, image.height()) *
                              (config.mode == OrderingMode::kChannelJoint ? image.channels() : 1);
  if (info.context_window != kUnboundedContext &&
      ContextTokenCount(info.prompt_tokens, longest) > info.context_window) {
    throw CodecError(ErrorKind::kConfig, "context overflow: " + std::to_string(info.prompt_tokens) +
                                             " prompt tokens + " + std::to_string(longest) +
                                             " symbols exceed the provider window of " +
                                             std::to_string(info.context_window));
  }

  const auto patches = Partition(image, config.patch_w, config.patch_h);
  const std::size_t per_patch = SequencesPerPatch(config.mode, image.channels());
  std::vector<Bitstream> streams(patches.size() * per_patch);

  RunPlan(SchedulePatches(patches.size(), config.workers), [&](std::size_t i) {
    const auto seqs = Flatten(image, patches[i], config.mode);
    for (std::size_t j = 0; j < seqs.size(); ++j) streams[i * per_patch + j] = EncodeSequence(provider, config, seqs[j]);
  });

  CompressedContainer out;
  ContainerHeader& h = out.header;
  h.width = image.width();
  h.height = image.height();
  h.channels = static_cast<uint8_t>(image.channels());
  h.patch_w = static_cast<uint16_t>(config.patch_w);
  h.patch_h = static_cast<uint16_t>(config.patch_h);
  h.mode = config.mode;
  h.precision = static_cast<uint8_t>(config.precision);
  h.provider_fingerprint = info.fingerprint;
  h.map_fingerprint = info.map_fingerprint;
  h.prompt = std::string(config.prompt.effective_text());
  h.patch_count = static_cast<uint32_t>(patches.size());
  for (auto& s : streams) {
    if (s.bit_length > std::numeric_limits<uint32_t>::max()) {
      throw CodecError(ErrorKind::kConfig, "patch bitstream exceeds 2^32 bits; use smaller patches");
    }
    h.bit_lengths.push_back(static_cast<uint32_t>(s.bit_length));
    out.payload.insert(out.payload.end(), s.bytes.begin(), s.bytes.end());
  }
  return out;
}

ImageBuffer Decompress(const CompressedContainer& container, ProbabilityProvider& provider, unsigned workers) {
  const ContainerHeader& h = container.header;
  if (h.bit_lengths.size() != std::size_t{h.patch_count} * h.sequences_per_patch()) {
    Corrupt("bit length table does not match the patch count");
  }
  if (container.payload.size() != h.payload_bytes()) Corrupt("payload size inconsistent with the bit lengths");

  const PromptConfig prompt = h.prompt_config();
  const ProviderInfo info = provider.Prepare(prompt, h.mode);
  if (info.fingerprint != h.provider_fingerprint) {
    throw CodecError(ErrorKind::kWrongProvider, "container was written by a different provider than " +
                                                    provider.describe());
  }
  if (info.map_fingerprint != h.map_fingerprint) {
    throw CodecError(ErrorKind::kWrongProvider, "digital token map differs from the one used to encode");
  }

  ImageBuffer image(h.width, h.height, h.channels);
  const auto patches = Partition(image, h.patch_w, h.patch_h);
  const std::size_t per_patch = h.sequences_per_patch();
  std::vector<std::size_t> offsets(h.bit_lengths.size() + 1, 0);
  for (std::size_t i = 0; i < h.bit_lengths.size(); ++i) {
    offsets[i + 1] = offsets[i] + Bitstream::ByteLength(h.bit_lengths[i]);
  }

  RunPlan(SchedulePatches(patches.size(), std::max(1u, workers)), [&](std::size_t i) {
    const PatchSpec& patch = patches[i];
    const std::size_t count = patch.area() * (per_patch == 1 ? h.channels : 1);
    std::vector<SymbolSequence> seqs(per_patch);
    for (std::size_t j = 0; j < per_patch; ++j) {
      const std::size_t k = i * per_patch + j;
      Bitstream bits;
      bits.bit_length = h.bit_lengths[k];
      bits.bytes.assign(container.payload.begin() + static_cast<std::ptrdiff_t>(offsets[k]),
                        container.payload.begin() + static_cast<std::ptrdiff_t>(offsets[k + 1]));
      seqs[j].ordering = h.mode;
      if (h.mode == OrderingMode::kChannelIndependent) seqs[j].channel = static_cast<uint8_t>(j);
      seqs[j].symbols = DecodeSequence(provider, prompt, h.mode, seqs[j].channel, h.precision, bits, count);
    }
    StorePatch(image, patch, Unflatten(seqs, patch, h.mode, h.channels));
  });
  return image;
}

}  // namespace p2codec

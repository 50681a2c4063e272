#include "p2codec/image.hpp"

#include <string>

#include "p2codec/error.hpp"

namespace p2codec {

namespace {

void CheckChannels(uint32_t channels) {
  if (channels != 1 && channels != 3) {
    throw CodecError(ErrorKind::kInvalidInput, "channels must be 1 or 3, got " + std::to_string(channels));
  }
}

}  // namespace

ImageBuffer::ImageBuffer(uint32_t width, uint32_t height, uint32_t channels)
    : width_(width), height_(height), channels_(channels) {
  CheckChannels(channels);
  samples_.assign(subpixel_count(), 0);
}

ImageBuffer::ImageBuffer(uint32_t width, uint32_t height, uint32_t channels, std::vector<uint8_t> samples)
    : width_(width), height_(height), channels_(channels), samples_(std::move(samples)) {
  CheckChannels(channels);
  if (samples_.size() != subpixel_count()) {
    throw CodecError(ErrorKind::kInvalidInput, "sample count " + std::to_string(samples_.size()) +
                                                   " does not match " + std::to_string(width) + "x" +
                                                   std::to_string(height) + "x" + std::to_string(channels));
  }
}

std::optional<OrderingMode> OrderingModeFromTag(uint8_t tag) {
  switch (tag) {
    case 0: return OrderingMode::kChannelJoint;
    case 1: return OrderingMode::kChannelIndependent;
    default: return std::nullopt;
  }
}

const char* ToString(OrderingMode mode) {
  return mode == OrderingMode::kChannelJoint ? "joint" : "indep";
}

std::size_t PatchCount(uint32_t width, uint32_t height, uint32_t patch_w, uint32_t patch_h) {
  if (patch_w == 0 || patch_h == 0) return 0;
  const std::size_t cols = (std::size_t{width} + patch_w - 1) / patch_w;
  const std::size_t rows = (std::size_t{height} + patch_h - 1) / patch_h;
  return cols * rows;
}

std::size_t SequencesPerPatch(OrderingMode mode, uint32_t channels) {
  return mode == OrderingMode::kChannelIndependent ? channels : 1;
}

std::vector<PatchSpec> Partition(const ImageBuffer& image, uint32_t patch_w, uint32_t patch_h) {
  if (image.empty()) throw CodecError(ErrorKind::kInvalidInput, "cannot partition an empty image");
  if (patch_w == 0 || patch_h == 0) throw CodecError(ErrorKind::kInvalidInput, "patch dimensions must be >= 1");

  std::vector<PatchSpec> patches;
  patches.reserve(PatchCount(image.width(), image.height(), patch_w, patch_h));
  for (uint32_t y = 0; y < image.height(); y += patch_h) {
    const uint32_t h = std::min(patch_h, image.height() - y);
    for (uint32_t x = 0; x < image.width(); x += patch_w) {
      patches.push_back({x, y, std::min(patch_w, image.width() - x), h});
    }
  }
  return patches;
}

bool PatchInside(const ImageBuffer& image, const PatchSpec& patch) {
  return patch.w > 0 && patch.h > 0 && std::size_t{patch.x} + patch.w <= image.width() &&
         std::size_t{patch.y} + patch.h <= image.height();
}

std::vector<SymbolSequence> Flatten(const ImageBuffer& image, const PatchSpec& patch, OrderingMode mode) {
  if (!PatchInside(image, patch)) throw CodecError(ErrorKind::kInvalidInput, "patch lies outside the image");

  const uint32_t channels = image.channels();
  if (mode == OrderingMode::kChannelJoint || channels == 1) {
    SymbolSequence seq;
    seq.ordering = mode;
    if (mode == OrderingMode::kChannelIndependent) seq.channel = 0;
    seq.symbols.reserve(patch.area() * channels);
    for (uint32_t y = patch.y; y < patch.y + patch.h; ++y) {
      for (uint32_t x = patch.x; x < patch.x + patch.w; ++x) {
        for (uint32_t c = 0; c < channels; ++c) seq.symbols.push_back(image.at(x, y, c));
      }
    }
    return {std::move(seq)};
  }

  std::vector<SymbolSequence> seqs(channels);
  for (uint32_t c = 0; c < channels; ++c) {
    seqs[c].ordering = mode;
    seqs[c].channel = static_cast<uint8_t>(c);
    seqs[c].symbols.reserve(patch.area());
    for (uint32_t y = patch.y; y < patch.y + patch.h; ++y) {
      for (uint32_t x = patch.x; x < patch.x + patch.w; ++x) seqs[c].symbols.push_back(image.at(x, y, c));
    }
  }
  return seqs;
}

std::vector<uint8_t> Unflatten(std::span<const SymbolSequence> seqs, const PatchSpec& patch, OrderingMode mode,
                               uint32_t channels) {
  if (channels != 1 && channels != 3) throw CodecError(ErrorKind::kInvalidInput, "channels must be 1 or 3");
  const std::size_t area = patch.area();
  const std::size_t expected_seqs = SequencesPerPatch(mode, channels);
  if (seqs.size() != expected_seqs) {
    throw CodecError(ErrorKind::kCorruptStream, "expected " + std::to_string(expected_seqs) + " sequences, got " +
                                                    std::to_string(seqs.size()));
  }

  if (expected_seqs == 1) {
    if (seqs[0].symbols.size() != area * channels) {
      throw CodecError(ErrorKind::kCorruptStream, "sequence length " + std::to_string(seqs[0].symbols.size()) +
                                                      " does not match patch of " + std::to_string(area * channels));
    }
    return seqs[0].symbols;
  }

  std::vector<uint8_t> block(area * channels);
  for (uint32_t c = 0; c < channels; ++c) {
    if (seqs[c].symbols.size() != area) {
      throw CodecError(ErrorKind::kCorruptStream, "channel " + std::to_string(c) + " sequence length " +
                                                      std::to_string(seqs[c].symbols.size()) + " != " +
                                                      std::to_string(area));
    }
    for (std::size_t i = 0; i < area; ++i) block[i * channels + c] = seqs[c].symbols[i];
  }
  return block;
}

void StorePatch(ImageBuffer& image, const PatchSpec& patch, std::span<const uint8_t> block) {
  if (!PatchInside(image, patch)) throw CodecError(ErrorKind::kInvalidInput, "patch lies outside the image");
  const uint32_t channels = image.channels();
  if (block.size() != patch.area() * channels) throw CodecError(ErrorKind::kCorruptStream, "patch block size mismatch");
  std::size_t i = 0;
  for (uint32_t y = patch.y; y < patch.y + patch.h; ++y) {
    for (uint32_t x = patch.x; x < patch.x + patch.w; ++x) {
      for (uint32_t c = 0; c < channels; ++c) image.at(x, y, c) = block[i++];
    }
  }
}

}  // namespace p2codec

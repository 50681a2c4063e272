#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace p2codec {

// Raw 8-bit subpixel grid, row-major, channels interleaved per pixel.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  // Zero-filled image. channels must be 1 or 3.
  ImageBuffer(uint32_t width, uint32_t height, uint32_t channels);
  // Takes ownership of samples; size must equal width * height * channels.
  ImageBuffer(uint32_t width, uint32_t height, uint32_t channels, std::vector<uint8_t> samples);

  uint32_t width() const { return width_; }
  uint32_t height() const { return height_; }
  uint32_t channels() const { return channels_; }
  std::size_t pixel_count() const { return std::size_t{width_} * height_; }
  std::size_t subpixel_count() const { return pixel_count() * channels_; }
  bool empty() const { return pixel_count() == 0; }

  uint8_t at(uint32_t x, uint32_t y, uint32_t c) const {
    return samples_[(std::size_t{y} * width_ + x) * channels_ + c];
  }
  uint8_t& at(uint32_t x, uint32_t y, uint32_t c) {
    return samples_[(std::size_t{y} * width_ + x) * channels_ + c];
  }

  std::span<const uint8_t> samples() const { return samples_; }
  std::span<uint8_t> samples() { return samples_; }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  uint32_t width_ = 0;
  uint32_t height_ = 0;
  uint32_t channels_ = 1;
  std::vector<uint8_t> samples_;
};

// Serialized as a single byte tag.
enum class OrderingMode : uint8_t {
  kChannelJoint = 0,
  kChannelIndependent = 1,
};

std::optional<OrderingMode> OrderingModeFromTag(uint8_t tag);
const char* ToString(OrderingMode mode);

struct PatchSpec {
  uint32_t x = 0;
  uint32_t y = 0;
  uint32_t w = 0;
  uint32_t h = 0;

  std::size_t area() const { return std::size_t{w} * h; }
  friend bool operator==(const PatchSpec&, const PatchSpec&) = default;
};

// Under kChannelJoint, symbols[3i + k] is channel k of pixel i (raster order
// within the patch). Under kChannelIndependent there is one sequence per
// channel and `channel` names it.
struct SymbolSequence {
  std::vector<uint8_t> symbols;
  OrderingMode ordering = OrderingMode::kChannelJoint;
  std::optional<uint8_t> channel;

  friend bool operator==(const SymbolSequence&, const SymbolSequence&) = default;
};

// Raster-ordered, non-overlapping tiling. Edge patches carry the remainder.
std::vector<PatchSpec> Partition(const ImageBuffer& image, uint32_t patch_w, uint32_t patch_h);

// Number of patches Partition would produce, without materializing them.
std::size_t PatchCount(uint32_t width, uint32_t height, uint32_t patch_w, uint32_t patch_h);

// Number of coded sequences per patch for a mode and channel count.
std::size_t SequencesPerPatch(OrderingMode mode, uint32_t channels);

bool PatchInside(const ImageBuffer& image, const PatchSpec& patch);

std::vector<SymbolSequence> Flatten(const ImageBuffer& image, const PatchSpec& patch, OrderingMode mode);

// Inverse of Flatten. Returns the patch block, pixel-interleaved, row-major.
std::vector<uint8_t> Unflatten(std::span<const SymbolSequence> seqs, const PatchSpec& patch, OrderingMode mode,
                               uint32_t channels);

// Copy a pixel-interleaved patch block into the image.
void StorePatch(ImageBuffer& image, const PatchSpec& patch, std::span<const uint8_t> block);

}  // namespace p2codec

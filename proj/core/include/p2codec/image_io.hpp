#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "p2codec/image.hpp"

namespace p2codec {

// Binary PPM (P6) and PGM (P5), maxval 255 only.
ImageBuffer DecodePnm(std::span<const uint8_t> bytes);
std::vector<uint8_t> EncodePnm(const ImageBuffer& image);

ImageBuffer ReadPnm(const std::filesystem::path& path);
void WritePnm(const std::filesystem::path& path, const ImageBuffer& image);

struct RawGeometry {
  uint32_t width = 0;
  uint32_t height = 0;
  uint32_t channels = 0;
};

// Parses "WxHxC".
RawGeometry ParseRawGeometry(std::string_view text);
ImageBuffer ReadRaw(const std::filesystem::path& path, const RawGeometry& geometry);

bool PngSupported();
// Only available when built against libpng; 8-bit gray/RGB after expansion,
// alpha stripped.
ImageBuffer ReadPng(const std::filesystem::path& path);

// Dispatches on the file signature: P5/P6 or PNG.
ImageBuffer ReadImage(const std::filesystem::path& path);

std::vector<uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path, std::span<const uint8_t> bytes);

}  // namespace p2codec

#include "p2codec/image_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>

#include "p2codec/error.hpp"

#ifdef P2CODEC_HAVE_PNG
#include <png.h>
#endif

namespace p2codec {

namespace {

class PnmCursor {
 public:
  explicit PnmCursor(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  void SkipSpaceAndComments() {
    while (pos_ < bytes_.size()) {
      const char c = static_cast<char>(bytes_[pos_]);
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') {
        ++pos_;
      } else {
        break;
      }
    }
  }

  uint32_t ReadUnsigned() {
    SkipSpaceAndComments();
    uint32_t value = 0;
    const char* begin = reinterpret_cast<const char*>(bytes_.data()) + pos_;
    const char* end = reinterpret_cast<const char*>(bytes_.data()) + bytes_.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin) throw CodecError(ErrorKind::kInvalidInput, "malformed PNM header");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void SkipSingleWhitespace() {
    if (pos_ >= bytes_.size()) throw CodecError(ErrorKind::kInvalidInput, "truncated PNM header");
    ++pos_;
  }

  std::size_t pos() const { return pos_; }

 private:
  std::span<const uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

ImageBuffer DecodePnm(std::span<const uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw CodecError(ErrorKind::kInvalidInput, "not a binary PGM/PPM (P5/P6) file");
  }
  const uint32_t channels = bytes[1] == '6' ? 3 : 1;
  PnmCursor cursor(bytes.subspan(2));
  const uint32_t width = cursor.ReadUnsigned();
  const uint32_t height = cursor.ReadUnsigned();
  const uint32_t maxval = cursor.ReadUnsigned();
  if (maxval != 255) throw CodecError(ErrorKind::kInvalidInput, "only maxval 255 is supported");
  cursor.SkipSingleWhitespace();

  const std::size_t offset = 2 + cursor.pos();
  const std::size_t needed = std::size_t{width} * height * channels;
  if (bytes.size() - offset < needed) throw CodecError(ErrorKind::kInvalidInput, "truncated PNM raster");
  std::vector<uint8_t> samples(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                               bytes.begin() + static_cast<std::ptrdiff_t>(offset + needed));
  return ImageBuffer(width, height, channels, std::move(samples));
}

std::vector<uint8_t> EncodePnm(const ImageBuffer& image) {
  const std::string header = std::string(image.channels() == 3 ? "P6" : "P5") + "\n" +
                             std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.samples().begin(), image.samples().end());
  return out;
}

std::vector<uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CodecError(ErrorKind::kInvalidInput, "cannot open " + path.string());
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void WriteFileBytes(const std::filesystem::path& path, std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CodecError(ErrorKind::kInvalidInput, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CodecError(ErrorKind::kInvalidInput, "short write to " + path.string());
}

ImageBuffer ReadPnm(const std::filesystem::path& path) { return DecodePnm(ReadFileBytes(path)); }

void WritePnm(const std::filesystem::path& path, const ImageBuffer& image) {
  WriteFileBytes(path, EncodePnm(image));
}

RawGeometry ParseRawGeometry(std::string_view text) {
  RawGeometry g;
  uint32_t* fields[] = {&g.width, &g.height, &g.channels};
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t end = i < 2 ? text.find('x', pos) : text.size();
    if (end == std::string_view::npos) throw CodecError(ErrorKind::kInvalidInput, "raw geometry must be WxHxC");
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + end, *fields[i]);
    if (ec != std::errc() || ptr != text.data() + end) {
      throw CodecError(ErrorKind::kInvalidInput, "raw geometry must be WxHxC");
    }
    pos = end + 1;
  }
  return g;
}

ImageBuffer ReadRaw(const std::filesystem::path& path, const RawGeometry& geometry) {
  auto bytes = ReadFileBytes(path);
  const std::size_t needed = std::size_t{geometry.width} * geometry.height * geometry.channels;
  if (bytes.size() != needed) {
    throw CodecError(ErrorKind::kInvalidInput, "raw file holds " + std::to_string(bytes.size()) + " bytes, expected " +
                                                   std::to_string(needed));
  }
  return ImageBuffer(geometry.width, geometry.height, geometry.channels, std::move(bytes));
}

#ifdef P2CODEC_HAVE_PNG

bool PngSupported() { return true; }

ImageBuffer ReadPng(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw CodecError(ErrorKind::kInvalidInput, "cannot read PNG " + path.string() + ": " + img.message);
  }
  const bool gray = (img.format & PNG_FORMAT_FLAG_COLOR) == 0;
  img.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  const uint32_t channels = gray ? 1 : 3;
  std::vector<uint8_t> samples(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, samples.data(), 0, nullptr)) {
    png_image_free(&img);
    throw CodecError(ErrorKind::kInvalidInput, "cannot decode PNG " + path.string() + ": " + img.message);
  }
  return ImageBuffer(img.width, img.height, channels, std::move(samples));
}

#else

bool PngSupported() { return false; }

ImageBuffer ReadPng(const std::filesystem::path& path) {
  throw CodecError(ErrorKind::kInvalidInput, "PNG input not supported in this build: " + path.string());
}

#endif

ImageBuffer ReadImage(const std::filesystem::path& path) {
  auto bytes = ReadFileBytes(path);
  static constexpr uint8_t kPngSignature[] = {0x89, 'P', 'N', 'G'};
  if (bytes.size() >= 4 && std::equal(std::begin(kPngSignature), std::end(kPngSignature), bytes.begin())) {
    return ReadPng(path);
  }
  return DecodePnm(bytes);
}

}  // namespace p2codec

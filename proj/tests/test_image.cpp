#include <doctest.h>

#include <numeric>
#include <random>

#include "p2codec/error.hpp"
#include "p2codec/image.hpp"
#include "p2codec/image_io.hpp"
#include "test_support.hpp"

using namespace p2codec;

namespace {

ImageBuffer TwoPixelImage() { return ImageBuffer(2, 1, 3, {10, 20, 30, 40, 50, 60}); }

}  // namespace

TEST_CASE("ImageBuffer enforces sample count and channel count") {
  CHECK_THROWS_AS(ImageBuffer(2, 2, 3, std::vector<uint8_t>(11)), CodecError);
  CHECK_THROWS_AS(ImageBuffer(2, 2, 2), CodecError);
  CHECK_NOTHROW(ImageBuffer(2, 2, 1, std::vector<uint8_t>(4)));
}

TEST_CASE("partition tiles exactly in raster order") {
  SUBCASE("32x32 by 16") {
    ImageBuffer img(32, 32, 3);
    const auto p = Partition(img, 16, 16);
    REQUIRE(p.size() == 4);
    CHECK(p[0] == PatchSpec{0, 0, 16, 16});
    CHECK(p[1] == PatchSpec{16, 0, 16, 16});
    CHECK(p[2] == PatchSpec{0, 16, 16, 16});
    CHECK(p[3] == PatchSpec{16, 16, 16, 16});
  }
  SUBCASE("remainder column") {
    ImageBuffer img(20, 16, 3);
    const auto p = Partition(img, 16, 16);
    REQUIRE(p.size() == 2);
    CHECK(p[0] == PatchSpec{0, 0, 16, 16});
    CHECK(p[1] == PatchSpec{16, 0, 4, 16});
  }
  SUBCASE("identity") {
    ImageBuffer img(16, 16, 1);
    const auto p = Partition(img, 16, 16);
    REQUIRE(p.size() == 1);
    CHECK(p[0] == PatchSpec{0, 0, 16, 16});
  }
  SUBCASE("empty image rejected") {
    ImageBuffer img(0, 5, 3);
    try {
      Partition(img, 16, 16);
      FAIL("expected an error");
    } catch (const CodecError& e) {
      CHECK(e.kind() == ErrorKind::kInvalidInput);
    }
  }
}

TEST_CASE("partition is a disjoint exact cover for random geometries") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<uint32_t> dim(1, 70);
  std::uniform_int_distribution<uint32_t> patch(1, 20);
  for (int trial = 0; trial < 300; ++trial) {
    ImageBuffer img(dim(rng), dim(rng), 1);
    const uint32_t pw = patch(rng);
    const uint32_t ph = patch(rng);
    const auto patches = Partition(img, pw, ph);
    CHECK(patches.size() == PatchCount(img.width(), img.height(), pw, ph));
    std::vector<int> cover(img.pixel_count(), 0);
    std::size_t area = 0;
    for (const auto& p : patches) {
      REQUIRE(PatchInside(img, p));
      CHECK(p.w <= pw);
      CHECK(p.h <= ph);
      area += p.area();
      for (uint32_t y = p.y; y < p.y + p.h; ++y) {
        for (uint32_t x = p.x; x < p.x + p.w; ++x) ++cover[std::size_t{y} * img.width() + x];
      }
    }
    CHECK(area == img.pixel_count());
    CHECK(std::all_of(cover.begin(), cover.end(), [](int c) { return c == 1; }));
    for (std::size_t i = 1; i < patches.size(); ++i) {
      const auto& a = patches[i - 1];
      const auto& b = patches[i];
      CHECK((a.y < b.y || (a.y == b.y && a.x < b.x)));
    }
  }
}

TEST_CASE("flatten interleaves channels or splits them") {
  const ImageBuffer img = TwoPixelImage();
  const PatchSpec patch{0, 0, 2, 1};

  const auto joint = Flatten(img, patch, OrderingMode::kChannelJoint);
  REQUIRE(joint.size() == 1);
  CHECK(joint[0].symbols == std::vector<uint8_t>{10, 20, 30, 40, 50, 60});
  CHECK_FALSE(joint[0].channel.has_value());

  const auto indep = Flatten(img, patch, OrderingMode::kChannelIndependent);
  REQUIRE(indep.size() == 3);
  CHECK(indep[0].symbols == std::vector<uint8_t>{10, 40});
  CHECK(indep[1].symbols == std::vector<uint8_t>{20, 50});
  CHECK(indep[2].symbols == std::vector<uint8_t>{30, 60});
  CHECK(indep[2].channel == 2);

  CHECK_THROWS_AS(Flatten(img, PatchSpec{1, 0, 2, 1}, OrderingMode::kChannelJoint), CodecError);
}

TEST_CASE("16x16 RGB patch flattens to 768 symbols") {
  std::mt19937_64 rng(1);
  const auto img = p2test::RandomImage(rng, 16, 16, 3);
  CHECK(Flatten(img, {0, 0, 16, 16}, OrderingMode::kChannelJoint)[0].symbols.size() == 768);
}

TEST_CASE("grayscale flattens to one raster sequence in both modes") {
  ImageBuffer img(3, 2, 1, {1, 2, 3, 4, 5, 6});
  const auto joint = Flatten(img, {0, 0, 3, 2}, OrderingMode::kChannelJoint);
  const auto indep = Flatten(img, {0, 0, 3, 2}, OrderingMode::kChannelIndependent);
  REQUIRE(indep.size() == 1);
  CHECK(joint[0].symbols == indep[0].symbols);
  CHECK(joint[0].symbols == std::vector<uint8_t>{1, 2, 3, 4, 5, 6});
}

TEST_CASE("unflatten inverts the worked examples") {
  const PatchSpec patch{0, 0, 2, 1};
  const std::vector<SymbolSequence> joint = {{{10, 20, 30, 40, 50, 60}, OrderingMode::kChannelJoint, {}}};
  CHECK(Unflatten(joint, patch, OrderingMode::kChannelJoint, 3) == std::vector<uint8_t>{10, 20, 30, 40, 50, 60});

  const std::vector<SymbolSequence> indep = {{{10, 40}, OrderingMode::kChannelIndependent, 0},
                                             {{20, 50}, OrderingMode::kChannelIndependent, 1},
                                             {{30, 60}, OrderingMode::kChannelIndependent, 2}};
  CHECK(Unflatten(indep, patch, OrderingMode::kChannelIndependent, 3) ==
        std::vector<uint8_t>{10, 20, 30, 40, 50, 60});

  const std::vector<SymbolSequence> short_seq = {{{10, 20, 30}, OrderingMode::kChannelJoint, {}}};
  try {
    Unflatten(short_seq, patch, OrderingMode::kChannelJoint, 3);
    FAIL("expected an error");
  } catch (const CodecError& e) {
    CHECK(e.kind() == ErrorKind::kCorruptStream);
  }
}

TEST_CASE("property: unflatten(flatten(x)) is the identity and the index law holds") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<uint32_t> dim(1, 64);
  std::uniform_int_distribution<uint32_t> patch(1, 24);
  for (int trial = 0; trial < 150; ++trial) {
    const uint32_t channels = trial % 2 ? 3 : 1;
    const auto img = p2test::RandomImage(rng, dim(rng), dim(rng), channels);
    for (auto mode : {OrderingMode::kChannelJoint, OrderingMode::kChannelIndependent}) {
      ImageBuffer rebuilt(img.width(), img.height(), channels);
      for (const auto& p : Partition(img, patch(rng), patch(rng))) {
        const auto seqs = Flatten(img, p, mode);
        if (mode == OrderingMode::kChannelJoint) {
          std::size_t i = 0;
          for (uint32_t y = p.y; y < p.y + p.h; ++y) {
            for (uint32_t x = p.x; x < p.x + p.w; ++x, ++i) {
              for (uint32_t k = 0; k < channels; ++k) REQUIRE(seqs[0].symbols[channels * i + k] == img.at(x, y, k));
            }
          }
        }
        StorePatch(rebuilt, p, Unflatten(seqs, p, mode, channels));
      }
      REQUIRE(rebuilt == img);
    }
  }
}

TEST_CASE("PNM encode/decode and raw geometry") {
  std::mt19937_64 rng(3);
  for (uint32_t channels : {1u, 3u}) {
    const auto img = p2test::RandomImage(rng, 7, 5, channels);
    CHECK(DecodePnm(EncodePnm(img)) == img);
  }

  const std::string with_comment = "P5\n# comment\n2 1\n255\n\x07\x09";
  const auto img = DecodePnm({reinterpret_cast<const uint8_t*>(with_comment.data()), with_comment.size()});
  CHECK(img.width() == 2);
  CHECK(img.at(1, 0, 0) == 9);

  const std::string deep = "P6\n1 1\n65535\n\0\0\0\0\0\0";
  CHECK_THROWS_AS(DecodePnm({reinterpret_cast<const uint8_t*>(deep.data()), deep.size()}), CodecError);
  const std::string truncated = "P6\n2 2\n255\n\1\2\3";
  CHECK_THROWS_AS(DecodePnm({reinterpret_cast<const uint8_t*>(truncated.data()), truncated.size()}), CodecError);

  const auto g = ParseRawGeometry("17x5x3");
  CHECK(g.width == 17);
  CHECK(g.height == 5);
  CHECK(g.channels == 3);
  CHECK_THROWS_AS(ParseRawGeometry("17x5"), CodecError);
  CHECK_THROWS_AS(ParseRawGeometry("17x5x3x1"), CodecError);
}

TEST_CASE("natural crops load from the test corpus") {
  for (const auto& entry : std::filesystem::directory_iterator(p2test::DataDir() / "natural")) {
    const auto img = ReadImage(entry.path());
    CHECK(img.width() == 64);
    CHECK(img.height() == 64);
    CHECK(img.channels() == 3);
  }
}

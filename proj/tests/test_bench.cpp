#include <doctest.h>

#include <cmath>
#include <random>

#include "p2codec/adaptive_model.hpp"
#include "p2codec/bench.hpp"
#include "p2codec/error.hpp"
#include "test_support.hpp"

using namespace p2codec;

TEST_CASE("bpsp divides bits by subpixels") {
  CHECK(Bpsp(768, 16, 16, 3) == 1.0);
  CHECK(Bpsp(8ull * 64 * 64 * 3, 64, 64, 3) == 8.0);
  CHECK(Bpsp(8ull * 5 * 7, 5, 7, 1) == 8.0);
  for (auto [w, h, c] : {std::tuple{0u, 4u, 3u}, std::tuple{4u, 0u, 3u}, std::tuple{4u, 4u, 0u}}) {
    try {
      Bpsp(100, w, h, c);
      FAIL("zero area accepted");
    } catch (const CodecError& e) {
      CHECK(e.kind() == ErrorKind::kInvalidInput);
    }
  }
}

TEST_CASE("published reference values are carried verbatim") {
  const auto& refs = PublishedReferenceValues();
  REQUIRE(refs.size() >= 2);
  bool kodak = false, clic = false;
  for (const auto& r : refs) {
    if (r.label.find("Kodak") != std::string::npos && r.bpsp == 2.83) kodak = true;
    if (r.label.find("CLIC") != std::string::npos && r.bpsp == 2.08) clic = true;
  }
  CHECK(kodak);
  CHECK(clic);
}

TEST_CASE("ablation grid produces one lossless row per cell") {
  std::mt19937_64 rng(1);
  std::vector<NamedImage> corpus = {{"a", p2test::StructuredImage(rng, 16, 16, 3)},
                                    {"b", p2test::RandomImage(rng, 20, 12, 3)}};
  AdaptiveModelProvider order1(1);
  const std::vector<NamedProvider> providers = {{"builtin:order1", &order1}};
  const auto report = RunAblation(corpus, providers, AblationGrid{});
  CHECK(report.rows.size() == 8);
  CHECK(report.valid());
  for (const auto& row : report.rows) {
    CHECK(row.lossless);
    CHECK(row.payload_bpsp > 0.0);
    CHECK(row.total_bpsp > row.payload_bpsp);
  }
  const auto agg = report.aggregates();
  CHECK(agg.size() == 4);
  for (const auto& a : agg) CHECK(a.count == 2);

  const auto csv = report.ToCsv();
  // Header, eight rows, then the reference values.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9 + PublishedReferenceValues().size());
  const auto table = report.ToTable();
  CHECK(table.find(ConfigLabel("builtin:order1", OrderingMode::kChannelIndependent, false)) != std::string::npos);
  CHECK(table.find(ConfigLabel("builtin:order1", OrderingMode::kChannelJoint, true)) != std::string::npos);
  CHECK(table.find("2.83") != std::string::npos);
}

TEST_CASE("a report with a failed row is invalid") {
  BenchReport report;
  report.rows.push_back(BenchRow{"x", "c", 1.0, 1.0, 0.0, 0.0, true, true});
  CHECK(report.valid());
  report.rows.push_back(BenchRow{"y", "c", 1.0, 1.0, 0.0, 0.0, false, true});
  CHECK_FALSE(report.valid());
}

TEST_CASE("trace on a constant patch") {
  ImageBuffer img(16, 16, 3);
  for (auto& s : img.samples()) s = 201;
  AdaptiveModelProvider provider(0);
  CodecConfig cfg;
  const auto trace = DumpDistributionTrace(img, provider, 0, cfg);
  REQUIRE(trace.records.size() == 768);
  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    CHECK(trace.records[i].argmax == 201);
    CHECK(trace.records[i].neg_log2_p <= trace.records[i - 1].neg_log2_p);
  }
  CHECK(trace.records[0].neg_log2_p == doctest::Approx(8.0));
  CHECK(std::abs(double(trace.coded_bits) - trace.ideal_bits()) <= 64.0);
  const auto csv = trace.ToCsv();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 769);
}

TEST_CASE("trace coded bits match the container and stay within the bound") {
  std::mt19937_64 rng(2);
  const auto img = p2test::StructuredImage(rng, 24, 24, 3);
  AdaptiveModelProvider provider(1);
  for (auto mode : {OrderingMode::kChannelJoint, OrderingMode::kChannelIndependent}) {
    CodecConfig cfg;
    cfg.mode = mode;
    for (std::size_t patch = 0; patch < 4; ++patch) {
      const auto trace = DumpDistributionTrace(img, provider, patch, cfg);
      CHECK(double(trace.coded_bits) <= trace.ideal_bits() + 64.0);
      CHECK(double(trace.coded_bits) >= trace.ideal_bits() - 64.0);
    }
    const auto container = Compress(img, provider, cfg);
    const auto trace0 = DumpDistributionTrace(img, provider, 0, cfg);
    uint64_t bits = 0;
    for (std::size_t s = 0; s < container.header.sequences_per_patch(); ++s) bits += container.header.bit_lengths[s];
    CHECK(trace0.coded_bits == bits);
  }
  CHECK_THROWS_AS(DumpDistributionTrace(img, provider, 4, CodecConfig{}), CodecError);
}

TEST_CASE("external comparison with a stored-raw codec") {
  std::mt19937_64 rng(3);
  std::vector<NamedImage> corpus = {{"r", p2test::RandomImage(rng, 16, 16, 3)}};
  ExternalCodec raw;
  raw.name = "raw";
  raw.binary = "tail";
  raw.encode_command = "tail -c 768 {in} > {out}";
  raw.decode_command = "{ printf 'P6\\n16 16\\n255\\n'; cat {out}; } > {dec}";
  raw.extension = ".raw";
  ExternalCodec missing{"ghost", "definitely-not-a-codec-binary", "x {in} {out}", "", ".x"};
  std::vector<std::string> warnings;
  const auto rows = CompareExternal(corpus, {raw, missing}, &warnings);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].payload_bpsp == 8.0);
  CHECK(rows[0].lossless);
  CHECK(rows[0].config == "external/raw");
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("ghost") != std::string::npos);
}

TEST_CASE("default external codecs are only run when present") {
  std::mt19937_64 rng(4);
  std::vector<NamedImage> corpus = {{"r", p2test::RandomImage(rng, 8, 8, 3)}};
  std::vector<std::string> warnings;
  const auto codecs = DefaultExternalCodecs();
  const auto rows = CompareExternal(corpus, codecs, &warnings);
  std::size_t present = 0;
  for (const auto& c : codecs) present += BinaryOnPath(c.binary);
  CHECK(warnings.size() + present >= codecs.size());
  CHECK(rows.size() <= present);
}

TEST_CASE("corpus loading") {
  const auto corpus = LoadCorpus(p2test::DataDir() / "natural");
  CHECK(corpus.size() == 10);
  for (const auto& item : corpus) {
    CHECK(item.image.width() == 64);
    CHECK(item.image.channels() == 3);
  }
  CHECK_THROWS_AS(LoadCorpus(p2test::DataDir() / "does-not-exist"), CodecError);
}

#include "p2codec/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <random>
#include <sstream>

#include "p2codec/error.hpp"
#include "p2codec/image_io.hpp"

namespace p2codec {

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::duration d) { return std::chrono::duration<double>(d).count(); }

std::string Fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string ShellQuote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::string Substitute(std::string command, const std::string& key, const std::string& value) {
  for (std::size_t pos = command.find(key); pos != std::string::npos; pos = command.find(key, pos + value.size())) {
    command.replace(pos, key.size(), value);
  }
  return command;
}

}  // namespace

double Bpsp(uint64_t bits, uint32_t width, uint32_t height, uint32_t channels) {
  const uint64_t subpixels = uint64_t{width} * height * channels;
  if (subpixels == 0) throw CodecError(ErrorKind::kInvalidInput, "bpsp of a zero-area image");
  return double(bits) / double(subpixels);
}

const std::vector<ReferenceValue>& PublishedReferenceValues() {
  static const std::vector<ReferenceValue> kValues = {
      {"Kodak, fine-tuned 8B model", 2.83},
      {"CLIC.m, fine-tuned 8B model", 2.08},
      {"Kodak, PNG", 4.35},
  };
  return kValues;
}

std::string ConfigLabel(const std::string& provider, OrderingMode mode, bool prompt) {
  return provider + "/" + ToString(mode) + "/prompt-" + (prompt ? "on" : "off");
}

bool BenchReport::valid() const {
  auto ok = [](const BenchRow& r) { return !r.available || r.lossless; };
  return std::all_of(rows.begin(), rows.end(), ok) && std::all_of(external_rows.begin(), external_rows.end(), ok);
}

std::vector<BenchReport::Aggregate> BenchReport::aggregates() const {
  std::vector<Aggregate> out;
  std::map<std::string, std::size_t> index;
  auto add = [&](const BenchRow& row) {
    if (!row.available) return;
    auto [it, inserted] = index.emplace(row.config, out.size());
    if (inserted) out.push_back({row.config});
    Aggregate& a = out[it->second];
    a.mean_payload_bpsp += row.payload_bpsp;
    a.mean_total_bpsp += row.total_bpsp;
    ++a.count;
  };
  for (const auto& r : rows) add(r);
  for (const auto& r : external_rows) add(r);
  for (auto& a : out) {
    a.mean_payload_bpsp /= double(a.count);
    a.mean_total_bpsp /= double(a.count);
  }
  return out;
}

std::string BenchReport::ToCsv() const {
  std::ostringstream os;
  os << "image,config,payload_bpsp,total_bpsp,encode_s,decode_s,lossless,kind\n";
  auto emit = [&](const BenchRow& r, const char* kind) {
    os << r.image_id << ',' << r.config << ',' << Fixed(r.payload_bpsp, 6) << ',' << Fixed(r.total_bpsp, 6) << ','
       << Fixed(r.encode_seconds, 6) << ',' << Fixed(r.decode_seconds, 6) << ',' << (r.lossless ? 1 : 0) << ','
       << kind << '\n';
  };
  for (const auto& r : rows) emit(r, "codec");
  for (const auto& r : external_rows) emit(r, "external");
  for (const auto& ref : PublishedReferenceValues()) {
    os << "reference," << ref.label << ',' << Fixed(ref.bpsp, 2) << ",,,,,reference\n";
  }
  return os.str();
}

std::string BenchReport::ToTable() const {
  std::ostringstream os;
  os << "config                                   payload bpsp   total bpsp   images\n";
  for (const auto& a : aggregates()) {
    char line[256];
    std::snprintf(line, sizeof(line), "%-40s %12.4f %12.4f %8zu\n", a.config.c_str(), a.mean_payload_bpsp,
                  a.mean_total_bpsp, a.count);
    os << line;
  }
  os << "\npublished reference values (not reproduced here):\n";
  for (const auto& ref : PublishedReferenceValues()) os << "  " << ref.label << ": " << Fixed(ref.bpsp, 2) << '\n';
  os << "\nreport " << (valid() ? "valid: every cell round-tripped exactly" : "INVALID: lossless check failed")
     << '\n';
  return os.str();
}

BenchReport RunAblation(const std::vector<NamedImage>& corpus, const std::vector<NamedProvider>& providers,
                        const AblationGrid& grid) {
  BenchReport report;
  for (const auto& item : corpus) {
    for (const auto& named : providers) {
      for (OrderingMode mode : grid.modes) {
        for (bool prompt : grid.prompts) {
          CodecConfig config{.mode = mode,
                             .patch_w = grid.patch_w,
                             .patch_h = grid.patch_h,
                             .prompt = DefaultPrompt(mode, prompt),
                             .precision = grid.precision,
                             .workers = grid.workers};
          BenchRow row{.image_id = item.id, .config = ConfigLabel(named.name, mode, prompt)};

          (void)Compress(item.image, *named.provider, config);  // warm-up

          const auto t0 = Clock::now();
          const CompressedContainer container = Compress(item.image, *named.provider, config);
          const auto t1 = Clock::now();
          const auto bytes = container.Serialize();
          const ImageBuffer decoded =
              Decompress(CompressedContainer::Parse(bytes), *named.provider, grid.workers);
          const auto t2 = Clock::now();

          row.encode_seconds = Seconds(t1 - t0);
          row.decode_seconds = Seconds(t2 - t1);
          row.lossless = decoded == item.image;
          row.payload_bpsp = Bpsp(container.payload_bits(), item.image.width(), item.image.height(),
                                  item.image.channels());
          row.total_bpsp = Bpsp(uint64_t{bytes.size()} * 8, item.image.width(), item.image.height(),
                                item.image.channels());
          if (!row.lossless) {
            throw CodecError(ErrorKind::kHarnessFailure, "round trip not exact for " + item.id + " under " +
                                                             row.config);
          }
          report.rows.push_back(std::move(row));
        }
      }
    }
  }
  return report;
}

double DistributionTrace::ideal_bits() const {
  double total = 0.0;
  for (const auto& r : records) total += r.neg_log2_q;
  return total;
}

std::string DistributionTrace::ToCsv() const {
  std::ostringstream os;
  os << "sequence,position,symbol,argmax,neg_log2_p,neg_log2_q";
  for (int z = 0; z < 256; ++z) os << ",p" << z;
  os << '\n';
  char buf[40];
  for (const auto& r : records) {
    os << r.sequence << ',' << r.position << ',' << int(r.symbol) << ',' << r.argmax << ','
       << Fixed(r.neg_log2_p, 6) << ',' << Fixed(r.neg_log2_q, 6);
    for (double p : r.pmf.p) {
      std::snprintf(buf, sizeof(buf), ",%.9g", p);
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

DistributionTrace DumpDistributionTrace(const ImageBuffer& image, ProbabilityProvider& provider,
                                        std::size_t patch_index, const CodecConfig& config) {
  const auto patches = Partition(image, config.patch_w, config.patch_h);
  if (patch_index >= patches.size()) {
    throw CodecError(ErrorKind::kInvalidInput, "patch index " + std::to_string(patch_index) + " out of range (" +
                                                   std::to_string(patches.size()) + " patches)");
  }
  provider.Prepare(config.prompt, config.mode);

  DistributionTrace trace;
  const auto seqs = Flatten(image, patches[patch_index], config.mode);
  for (std::size_t j = 0; j < seqs.size(); ++j) {
    auto session = provider.Begin(config.prompt, config.mode, seqs[j].channel);
    RangeEncoder encoder;
    for (std::size_t i = 0; i < seqs[j].symbols.size(); ++i) {
      const uint8_t s = seqs[j].symbols[i];
      TraceRecord rec;
      rec.sequence = j;
      rec.position = i;
      rec.symbol = s;
      rec.pmf = session->next_pmf();
      const QuantizedCdf cdf = QuantizeCdf(rec.pmf, config.precision);
      rec.argmax = rec.pmf.argmax();
      rec.neg_log2_p = -std::log2(rec.pmf.p[s]);
      rec.neg_log2_q = IdealCodeLengthBits(cdf, s);
      encoder.Encode(cdf, s);
      session->observe(s);
      trace.records.push_back(rec);
    }
    trace.coded_bits += encoder.Finish().bit_length;
  }
  return trace;
}

std::vector<ExternalCodec> DefaultExternalCodecs() {
  return {
      {"png", "convert", "convert {in} {out}", "convert {out} {dec}", ".png"},
      {"webp", "cwebp", "cwebp -quiet -lossless -z 9 {in} -o {out}", "dwebp -quiet {out} -ppm -o {dec}", ".webp"},
      {"jpegxl", "cjxl", "cjxl -q 100 -e 7 {in} {out}", "djxl {out} {dec}", ".jxl"},
      {"flif", "flif", "flif -e {in} {out}", "flif -d {out} {dec}", ".flif"},
  };
}

bool BinaryOnPath(const std::string& binary) {
  if (binary.find('/') != std::string::npos) return std::filesystem::exists(binary);
  const char* path = std::getenv("PATH");
  if (path == nullptr) return false;
  std::istringstream dirs(path);
  std::string dir;
  while (std::getline(dirs, dir, ':')) {
    if (!dir.empty() && std::filesystem::exists(std::filesystem::path(dir) / binary)) return true;
  }
  return false;
}

std::vector<BenchRow> CompareExternal(const std::vector<NamedImage>& corpus, const std::vector<ExternalCodec>& codecs,
                                      std::vector<std::string>* warnings) {
  std::vector<BenchRow> rows;
  std::mt19937_64 rng(std::random_device{}());
  const auto scratch = std::filesystem::temp_directory_path() / ("p2codec-ext-" + std::to_string(rng()));
  std::filesystem::create_directories(scratch);

  for (const auto& codec : codecs) {
    if (!BinaryOnPath(codec.binary)) {
      if (warnings != nullptr) warnings->push_back(codec.name + ": '" + codec.binary + "' not found, skipped");
      continue;
    }
    for (const auto& item : corpus) {
      const std::string ext = item.image.channels() == 3 ? ".ppm" : ".pgm";
      const auto in = scratch / ("in" + ext);
      const auto out = scratch / ("out" + codec.extension);
      const auto dec = scratch / ("dec" + ext);
      std::filesystem::remove(out);
      std::filesystem::remove(dec);
      WritePnm(in, item.image);

      auto fill = [&](std::string cmd) {
        cmd = Substitute(cmd, "{in}", ShellQuote(in.string()));
        cmd = Substitute(cmd, "{out}", ShellQuote(out.string()));
        return Substitute(cmd, "{dec}", ShellQuote(dec.string()));
      };

      BenchRow row{.image_id = item.id, .config = "external/" + codec.name};
      const auto t0 = Clock::now();
      const int rc = std::system(fill(codec.encode_command).c_str());
      const auto t1 = Clock::now();
      if (rc != 0 || !std::filesystem::exists(out)) {
        if (warnings != nullptr) warnings->push_back(codec.name + ": encoder failed on " + item.id);
        continue;
      }
      row.encode_seconds = Seconds(t1 - t0);
      const auto size = std::filesystem::file_size(out);
      row.payload_bpsp = row.total_bpsp =
          Bpsp(size * 8, item.image.width(), item.image.height(), item.image.channels());
      if (!codec.decode_command.empty()) {
        const auto t2 = Clock::now();
        const int drc = std::system(fill(codec.decode_command).c_str());
        row.decode_seconds = Seconds(Clock::now() - t2);
        if (drc == 0 && std::filesystem::exists(dec)) {
          try {
            row.lossless = ReadPnm(dec) == item.image;
          } catch (const CodecError&) {
            row.lossless = false;
          }
        }
      }
      rows.push_back(std::move(row));
    }
  }
  std::filesystem::remove_all(scratch);
  return rows;
}

std::vector<NamedImage> LoadCorpus(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw CodecError(ErrorKind::kInvalidInput, dir.string() + " is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".ppm" || ext == ".pgm" || (ext == ".png" && PngSupported())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<NamedImage> corpus;
  for (const auto& f : files) corpus.push_back({f.filename().string(), ReadImage(f)});
  return corpus;
}

}  // namespace p2codec

// p2codec: lossless image codec driven by next-symbol probability providers.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

#include "p2codec/bench.hpp"
#include "p2codec/container.hpp"
#include "p2codec/error.hpp"
#include "p2codec/image_io.hpp"
#include "p2codec/reference_server.hpp"
#include "p2codec/remote_provider.hpp"

namespace {

using namespace p2codec;

struct CodecOptions {
  std::string provider = "builtin:order1";
  std::string mode = "joint";
  uint32_t patch = kDefaultPatchSize;
  std::string prompt = "on";
  std::string prompt_text;
  unsigned precision = kDefaultCdfPrecision;
  unsigned workers = 1;
  double alpha = 1.0;
  std::string raw;
};

void AddProviderOptions(CLI::App* cmd, CodecOptions& o) {
  cmd->add_option("--provider", o.provider, "builtin:order0|order1|order2, remote:<host:port> or exec:<command>")
      ->capture_default_str();
  cmd->add_option("--alpha", o.alpha, "Smoothing of built-in adaptive models")->capture_default_str();
  cmd->add_option("--workers", o.workers, "Patches coded in parallel")->capture_default_str()->check(CLI::PositiveNumber);
}

void AddCodingOptions(CLI::App* cmd, CodecOptions& o) {
  cmd->add_option("--mode", o.mode, "Subpixel ordering")->check(CLI::IsMember({"joint", "indep"}))->capture_default_str();
  cmd->add_option("--patch", o.patch, "Square patch size in pixels")->check(CLI::Range(1, 65535))->capture_default_str();
  cmd->add_option("--prompt", o.prompt, "Prepend the task prompt")->check(CLI::IsMember({"on", "off"}))->capture_default_str();
  cmd->add_option("--prompt-text", o.prompt_text, "Override the default task prompt text");
  cmd->add_option("--precision", o.precision, "CDF precision in bits")->check(CLI::Range(8, 24))->capture_default_str();
  cmd->add_option("--raw", o.raw, "Read the input as raw WxHxC bytes instead of PPM/PGM/PNG");
}

OrderingMode ParseMode(const std::string& s) {
  return s == "indep" ? OrderingMode::kChannelIndependent : OrderingMode::kChannelJoint;
}

CodecConfig MakeConfig(const CodecOptions& o) {
  CodecConfig config;
  config.mode = ParseMode(o.mode);
  config.patch_w = config.patch_h = o.patch;
  config.prompt = DefaultPrompt(config.mode, o.prompt == "on");
  if (!o.prompt_text.empty()) config.prompt.text = o.prompt_text;
  config.precision = o.precision;
  config.workers = o.workers;
  return config;
}

ImageBuffer LoadInput(const std::string& path, const CodecOptions& o) {
  return o.raw.empty() ? ReadImage(path) : ReadRaw(path, ParseRawGeometry(o.raw));
}

std::vector<std::string> SplitList(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

AblationGrid ParseGrid(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) throw CodecError(ErrorKind::kConfig, "--grid must look like indep,joint/off,on");
  AblationGrid grid;
  grid.modes.clear();
  grid.prompts.clear();
  for (const auto& m : SplitList(text.substr(0, slash), ',')) {
    if (m != "joint" && m != "indep") throw CodecError(ErrorKind::kConfig, "unknown mode '" + m + "' in --grid");
    grid.modes.push_back(ParseMode(m));
  }
  for (const auto& p : SplitList(text.substr(slash + 1), ',')) {
    if (p != "on" && p != "off") throw CodecError(ErrorKind::kConfig, "unknown prompt setting '" + p + "' in --grid");
    grid.prompts.push_back(p == "on");
  }
  if (grid.modes.empty() || grid.prompts.empty()) throw CodecError(ErrorKind::kConfig, "empty --grid axis");
  return grid;
}

int RunCompress(const std::string& in, const std::string& out, const CodecOptions& o, bool verify) {
  const ImageBuffer image = LoadInput(in, o);
  auto provider = MakeProvider(o.provider, o.alpha);
  const CompressedContainer container = Compress(image, *provider, MakeConfig(o));
  const auto bytes = container.Serialize();
  if (verify && Decompress(CompressedContainer::Parse(bytes), *provider, o.workers) != image) {
    std::cerr << "verification failed: decoded image differs from the input\n";
    return 1;
  }
  WriteFileBytes(out, bytes);
  std::printf("%ux%ux%u -> %zu bytes, %.4f bpsp (payload %.4f)%s\n", image.width(), image.height(), image.channels(),
              bytes.size(), Bpsp(uint64_t{bytes.size()} * 8, image.width(), image.height(), image.channels()),
              Bpsp(container.payload_bits(), image.width(), image.height(), image.channels()),
              verify ? ", verified" : "");
  return 0;
}

int RunDecompress(const std::string& in, const std::string& out, const CodecOptions& o) {
  const auto container = CompressedContainer::Parse(ReadFileBytes(in));
  auto provider = MakeProvider(o.provider, o.alpha);
  WritePnm(out, Decompress(container, *provider, o.workers));
  return 0;
}

int RunBench(const std::string& corpus_dir, const std::string& grid_text, const std::string& providers_text,
             const std::string& csv, bool external, const CodecOptions& o) {
  const auto corpus = LoadCorpus(corpus_dir);
  if (corpus.empty()) throw CodecError(ErrorKind::kInvalidInput, "no images in " + corpus_dir);

  AblationGrid grid = ParseGrid(grid_text);
  grid.patch_w = grid.patch_h = o.patch;
  grid.precision = o.precision;
  grid.workers = o.workers;

  std::vector<std::unique_ptr<ProbabilityProvider>> owned;
  std::vector<NamedProvider> providers;
  for (const auto& spec : SplitList(providers_text, ',')) {
    owned.push_back(MakeProvider(spec, o.alpha));
    providers.push_back({spec, owned.back().get()});
  }

  BenchReport report = RunAblation(corpus, providers, grid);
  if (external) {
    std::vector<std::string> warnings;
    report.external_rows = CompareExternal(corpus, DefaultExternalCodecs(), &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  }
  if (!csv.empty()) {
    const std::string text = report.ToCsv();
    WriteFileBytes(csv, {reinterpret_cast<const uint8_t*>(text.data()), text.size()});
  }
  std::cout << report.ToTable();
  return report.valid() ? 0 : 1;
}

int RunTrace(const std::string& in, std::size_t patch_index, const std::string& csv, const CodecOptions& o) {
  const ImageBuffer image = LoadInput(in, o);
  auto provider = MakeProvider(o.provider, o.alpha);
  const DistributionTrace trace = DumpDistributionTrace(image, *provider, patch_index, MakeConfig(o));
  const std::string text = trace.ToCsv();
  if (csv.empty() || csv == "-") {
    std::cout << text;
  } else {
    WriteFileBytes(csv, {reinterpret_cast<const uint8_t*>(text.data()), text.size()});
  }
  std::fprintf(stderr, "%zu symbols, ideal %.1f bits, coded %llu bits\n", trace.records.size(), trace.ideal_bits(),
               static_cast<unsigned long long>(trace.coded_bits));
  return 0;
}

int RunMockServer(int order, uint32_t vocab, uint32_t window, int port, bool stdio) {
  wire::ReferenceLogitBackend backend(order, vocab, window);
  if (stdio) {
    wire::FdTransport transport(0, 1);
    wire::ServeConnection(transport, backend);
    return 0;
  }
  wire::TcpListener listener(static_cast<uint16_t>(port));
  std::fprintf(stderr, "listening on 127.0.0.1:%u\n", listener.port());
  for (;;) {
    auto transport = listener.Accept();
    try {
      wire::ServeConnection(*transport, backend);
    } catch (const CodecError& e) {
      std::fprintf(stderr, "connection dropped: %s\n", e.what());
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p2codec: lossless image compression with next-pixel prediction"};
  app.require_subcommand(1);

  CodecOptions opts;
  std::string in;
  std::string out;
  bool no_verify = false;

  auto* compress = app.add_subcommand("compress", "Compress a PPM/PGM/PNG (or raw) image into a .p2lc container");
  compress->add_option("input", in, "Input image")->required();
  compress->add_option("output", out, "Output container (.p2lc)")->required();
  compress->add_flag("--no-verify", no_verify, "Skip the decode check before writing");
  AddProviderOptions(compress, opts);
  AddCodingOptions(compress, opts);

  auto* decompress = app.add_subcommand("decompress", "Decode a .p2lc container to PPM/PGM");
  decompress->add_option("input", in, "Input container")->required();
  decompress->add_option("output", out, "Output image (.ppm/.pgm)")->required();
  AddProviderOptions(decompress, opts);

  std::string grid = "indep,joint/off,on";
  std::string providers = "builtin:order0,builtin:order1,builtin:order2";
  std::string csv;
  bool external = false;
  auto* bench = app.add_subcommand("bench", "Run the ordering x prompt ablation over a corpus directory");
  bench->add_option("corpus", in, "Directory of PPM/PGM/PNG images")->required();
  bench->add_option("--grid", grid, "Modes/prompt settings, e.g. indep,joint/off,on")->capture_default_str();
  bench->add_option("--providers", providers, "Comma-separated provider list")->capture_default_str();
  bench->add_option("--csv", csv, "Write per-image rows as CSV");
  bench->add_flag("--external", external, "Also run external codecs found on PATH");
  bench->add_option("--alpha", opts.alpha, "Smoothing of built-in adaptive models");
  bench->add_option("--workers", opts.workers, "Patches coded in parallel")->check(CLI::PositiveNumber);
  bench->add_option("--patch", opts.patch, "Square patch size")->check(CLI::Range(1, 65535));
  bench->add_option("--precision", opts.precision, "CDF precision in bits")->check(CLI::Range(8, 24));

  std::size_t patch_index = 0;
  auto* trace = app.add_subcommand("trace", "Dump per-symbol distributions for one patch as CSV");
  trace->add_option("input", in, "Input image")->required();
  trace->add_option("--patch-index", patch_index, "Raster index of the patch")->capture_default_str();
  trace->add_option("--csv", csv, "Output CSV (stdout when omitted)");
  AddProviderOptions(trace, opts);
  AddCodingOptions(trace, opts);

  int order = 1;
  uint32_t vocab = 1024;
  uint32_t window = 4096;
  int port = 0;
  bool stdio = false;
  auto* server = app.add_subcommand("mock-server", "Serve the wire protocol from a built-in model (for testing clients)");
  server->add_option("--order", order, "Adaptive model order")->check(CLI::Range(0, 2))->capture_default_str();
  server->add_option("--vocab", vocab, "Synthetic vocabulary size")->capture_default_str();
  server->add_option("--window", window, "Advertised context window")->capture_default_str();
  server->add_option("--listen", port, "TCP port on 127.0.0.1 (0 picks one)")->capture_default_str();
  server->add_flag("--stdio", stdio, "Serve a single connection over stdin/stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*compress) return RunCompress(in, out, opts, !no_verify);
    if (*decompress) return RunDecompress(in, out, opts);
    if (*bench) return RunBench(in, grid, providers, csv, external, opts);
    if (*trace) return RunTrace(in, patch_index, csv, opts);
    if (*server) return RunMockServer(order, vocab, window, port, stdio);
  } catch (const CodecError& e) {
    std::cerr << "p2codec: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "p2codec: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

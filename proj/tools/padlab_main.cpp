// padlab command-line front end: encode / analyze / probe / schedule.

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "padlab/analytic.hpp"
#include "padlab/featuremap_io.hpp"
#include "padlab/hash.hpp"
#include "padlab/mspie.hpp"
#include "padlab/net_json.hpp"
#include "padlab/posenc.hpp"
#include "padlab/presets.hpp"
#include "padlab/probe.hpp"
#include "padlab/report_io.hpp"
#include "padlab/stats.hpp"
#include "padlab/verdict.hpp"
#include "padlab/version.hpp"

namespace {

using nlohmann::json;
using namespace padlab;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;

GridSize parse_size(const std::string& text) {
  const auto sep = text.find('x');
  if (sep == std::string::npos) {
    throw ConfigError("size must look like HxW, got '" + text + "'");
  }
  try {
    const int h = std::stoi(text.substr(0, sep));
    const int w = std::stoi(text.substr(sep + 1));
    const GridSize size{h, w};
    validate_grid(size);
    return size;
  } catch (const std::invalid_argument&) {
    throw ConfigError("size must look like HxW, got '" + text + "'");
  } catch (const std::out_of_range&) {
    throw ConfigError("size out of range: '" + text + "'");
  }
}

OffsetSet parse_offsets(const std::string& text) {
  OffsetSet offsets;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find(';', pos);
    if (end == std::string::npos) end = text.size();
    const std::string pair = text.substr(pos, end - pos);
    const auto comma = pair.find(',');
    if (comma == std::string::npos) {
      throw ConfigError("offsets must look like 'di,dj;di,dj', got '" + text +
                        "'");
    }
    try {
      offsets.push_back(Offset{std::stoi(pair.substr(0, comma)),
                               std::stoi(pair.substr(comma + 1))});
    } catch (const std::exception&) {
      throw ConfigError("bad offset pair '" + pair + "'");
    }
    pos = end + 1;
  }
  if (offsets.empty()) {
    throw ConfigError("offset list is empty");
  }
  return offsets;
}

// Layers config-file values under CLI flags: a flag given on the command
// line wins, otherwise the config value (if present) replaces the default.
class ConfigLayer {
 public:
  void load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
      throw ConfigError("cannot open config file '" + path + "'");
    }
    try {
      in >> values_;
    } catch (const json::exception& e) {
      throw ConfigError("config file parse error: " + std::string(e.what()));
    }
    if (!values_.is_object()) {
      throw ConfigError("config file must hold a JSON object");
    }
    path_ = path;
  }

  template <typename T>
  void bind(CLI::Option* option, const std::string& key, T& target) {
    appliers_.push_back([option, key, &target, this]() {
      if (option->count() > 0 || !values_.contains(key)) return;
      try {
        target = values_.at(key).get<T>();
      } catch (const json::exception& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
      }
    });
  }

  void apply() {
    for (const auto& apply : appliers_) apply();
  }

  const std::string& path() const { return path_; }

 private:
  json values_ = json::object();
  std::vector<std::function<void()>> appliers_;
  std::string path_;
};

struct Emitter {
  std::filesystem::path dir;
  std::vector<EmittedFile> files;

  void add(std::vector<EmittedFile> more) {
    files.insert(files.end(), more.begin(), more.end());
  }
};

void write_manifest(Emitter& emitter, const std::string& command,
                    const json& config_echo, const json& input_hashes,
                    const json& verdict_summary,
                    std::chrono::steady_clock::time_point started) {
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  json manifest;
  manifest["command"] = command;
  manifest["config"] = config_echo;
  manifest["input_hashes"] = input_hashes;
  manifest["library_version"] = std::string(kVersion);
  manifest["verdict_summary"] = verdict_summary;
  manifest["wall_clock_s"] = wall;
  manifest["files"] = json::array();
  for (const EmittedFile& file : emitter.files) {
    manifest["files"].push_back({{"name", file.name}, {"hash", file.hash}});
  }
  write_file(emitter.dir, "manifest.json", manifest.dump(2) + "\n");
}

std::string hash_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open input file '" + path + "'");
  }
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return fnv1a64_hex(bytes);
}

NetworkSpec resolve_network(const std::string& preset, const std::string& file,
                            json& input_hashes) {
  if (!preset.empty() && !file.empty()) {
    throw ConfigError("give either a preset or a net file, not both");
  }
  if (!preset.empty()) {
    const NetworkSpec net = preset_network(preset);
    input_hashes["preset"] = preset;
    return net;
  }
  if (!file.empty()) {
    if (!std::filesystem::exists(file)) {
      throw ConfigError("network file '" + file + "' does not exist");
    }
    input_hashes[file] = hash_file_bytes(file);
    return load_network(file);
  }
  throw ConfigError("one of --preset or --net is required");
}

// ---------------------------------------------------------------------------
// encode

int cmd_encode(const std::string& kind_name, const std::string& size_text,
               int channels, std::uint64_t seed, std::uint64_t stream,
               const std::string& resize_mode, const std::string& out_dir,
               const json& config_echo,
               std::chrono::steady_clock::time_point started) {
  const GridSize size = parse_size(size_text);

  EncodingKind kind;
  if (kind_name == "csg") {
    kind = EncodingKind::make_csg();
  } else if (kind_name == "spe") {
    if (channels % 4 != 0 || channels < 4) {
      throw ConfigError("SPE channel count must be a positive multiple of 4, "
                        "got " + std::to_string(channels));
    }
    kind = EncodingKind::make_spe(channels);
  } else if (kind_name == "fixed") {
    kind = EncodingKind::make_fixed_constant(channels, RngSpec{seed, stream});
  } else {
    throw ConfigError("unknown encoding kind '" + kind_name +
                      "'; expected csg, spe or fixed");
  }

  std::optional<ResizeMode> mode;
  if (!resize_mode.empty()) {
    if (resize_mode == "interp") {
      mode = ResizeMode::Interp;
    } else if (resize_mode == "expand") {
      mode = ResizeMode::Expand;
      if (kind.tag != EncodingKindTag::Spe) {
        throw ConfigError("resize mode expand applies to SPE only");
      }
    } else {
      throw ConfigError("unknown resize mode '" + resize_mode + "'");
    }
  }

  const FeatureMap map = make_encoding(kind, size);

  Emitter emitter{out_dir, {}};
  emitter.add(export_encoding(emitter.dir, kind, map, mode));
  write_manifest(emitter, "encode", config_echo, json::object(),
                 json{{"kind", kind_name},
                      {"channels", map.channels()},
                      {"grid", size.str()}},
                 started);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// analyze

int cmd_analyze(const std::string& preset, const std::string& net_file,
                const std::string& size_text, std::uint64_t samples,
                std::uint64_t seed, std::uint64_t stream,
                const std::string& offsets_text, double z_threshold,
                int threads, const std::string& out_dir,
                const json& config_echo,
                std::chrono::steady_clock::time_point started) {
  json input_hashes = json::object();
  const NetworkSpec net = resolve_network(preset, net_file, input_hashes);
  const GridSize size = parse_size(size_text);
  const OffsetSet offsets = parse_offsets(offsets_text);
  if (samples < 2) {
    throw ConfigError("sample count must be >= 2");
  }

  const RngSpec rng{seed, stream};
  const StatReport report = estimate_moments(net, size, offsets, samples, rng,
                                             EstimateOptions{threads});
  const StationarityVerdict verdict = stationarity_verdict(report, z_threshold);

  std::optional<StatReport> analytic;
  if (is_linear(net)) {
    analytic = analytic_moments(net, size, offsets);
  }

  Emitter emitter{out_dir, {}};
  emitter.add(export_stat_report(emitter.dir, report, verdict,
                                 analytic ? &*analytic : nullptr,
                                 network_hash(net)));

  json summary;
  summary["stationary"] = verdict.stationary();
  summary["expectation_uniform"] = verdict.expectation_uniform;
  summary["expectation_max_z"] = verdict.expectation_max_z;
  summary["offsets_consistent"] = verdict.offsets_consistent;
  summary["analytic_available"] = analytic.has_value();
  write_manifest(emitter, "analyze", config_echo, input_hashes, summary,
                 started);
  // The verdict is data, not a process failure.
  return kExitOk;
}

// ---------------------------------------------------------------------------
// probe

int cmd_probe(const std::string& preset, const std::string& net_file,
              const std::string& size_text, std::uint64_t samples,
              std::uint64_t seed, std::uint64_t stream, double lambda,
              int threads, const std::string& out_dir, const json& config_echo,
              std::chrono::steady_clock::time_point started) {
  json input_hashes = json::object();
  const NetworkSpec net = resolve_network(preset, net_file, input_hashes);
  const GridSize size = parse_size(size_text);
  if (samples < 2) {
    throw ConfigError("sample count must be >= 2");
  }

  const LocationStats stats = location_statistics(
      net, size, samples, RngSpec{seed, stream}, EstimateOptions{threads});
  const ProbeSplit split = ProbeSplit::checkerboard(stats.size);
  const ProbeResult result = fit_probe(stats, stats.size, lambda, split);

  Emitter emitter{out_dir, {}};
  emitter.add(export_probe_result(emitter.dir, result));

  json summary;
  summary["score"] = positional_info_score(result);
  summary["r2"] = {result.r2[0], result.r2[1]};
  summary["lambda"] = result.lambda;
  write_manifest(emitter, "probe", config_echo, input_hashes, summary,
                 started);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// schedule

ScaleSchedule parse_schedule(const std::string& file,
                             const std::string& scales_text,
                             const std::string& probs_text,
                             json& input_hashes) {
  ScaleSchedule schedule;
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) {
      throw ConfigError("cannot open schedule file '" + file + "'");
    }
    input_hashes[file] = hash_file_bytes(file);
    json doc;
    try {
      in.clear();
      in.seekg(0);
      in >> doc;
    } catch (const json::exception& e) {
      throw ConfigError("schedule parse error: " + std::string(e.what()));
    }
    try {
      for (const auto& pair : doc.at("scales")) {
        schedule.scales.push_back(
            GridSize{pair.at(0).get<int>(), pair.at(1).get<int>()});
      }
      schedule.probabilities = doc.at("probs").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw ConfigError("schedule field error: " + std::string(e.what()));
    }
  } else {
    if (scales_text.empty() && probs_text.empty()) {
      return ScaleSchedule::default_three_scale();
    }
    if (scales_text.empty() || probs_text.empty()) {
      throw ConfigError("give both --scales and --probs, or neither");
    }
    std::size_t pos = 0;
    while (pos < scales_text.size()) {
      std::size_t end = scales_text.find(',', pos);
      if (end == std::string::npos) end = scales_text.size();
      schedule.scales.push_back(parse_size(scales_text.substr(pos, end - pos)));
      pos = end + 1;
    }
    pos = 0;
    while (pos < probs_text.size()) {
      std::size_t end = probs_text.find(',', pos);
      if (end == std::string::npos) end = probs_text.size();
      try {
        schedule.probabilities.push_back(
            std::stod(probs_text.substr(pos, end - pos)));
      } catch (const std::exception&) {
        throw ConfigError("bad probability '" +
                          probs_text.substr(pos, end - pos) + "'");
      }
      pos = end + 1;
    }
  }
  return schedule;
}

int cmd_schedule(const std::string& schedule_file,
                 const std::string& scales_text, const std::string& probs_text,
                 std::uint64_t steps, std::uint64_t seed,
                 const std::string& out_dir, const json& config_echo,
                 std::chrono::steady_clock::time_point started) {
  json input_hashes = json::object();
  const ScaleSchedule schedule =
      parse_schedule(schedule_file, scales_text, probs_text, input_hashes);
  schedule.validate();
  if (steps < 1) {
    throw ConfigError("step count must be >= 1");
  }

  std::vector<ScaleDraw> draws;
  draws.reserve(steps);
  std::vector<std::int64_t> counts(schedule.scales.size(), 0);
  for (std::uint64_t step = 0; step < steps; ++step) {
    draws.push_back(sample_scale(schedule, seed, step));
    counts[static_cast<std::size_t>(draws.back().scale_index)] += 1;
  }

  Emitter emitter{out_dir, {}};
  emitter.add(export_schedule_draws(emitter.dir, schedule, draws));

  json summary;
  summary["steps"] = steps;
  summary["empirical"] = json::array();
  for (std::size_t i = 0; i < counts.size(); ++i) {
    summary["empirical"].push_back(
        static_cast<double>(counts[i]) / static_cast<double>(steps));
  }
  write_manifest(emitter, "schedule", config_echo, input_hashes, summary,
                 started);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  const auto started = std::chrono::steady_clock::now();

  CLI::App app{"Feature statistics of convolutional pipelines: padding bias, "
               "positional encodings, multi-scale mechanics"};
  app.require_subcommand(1);

  std::string config_path;
  ConfigLayer layer;
  const auto add_config_option = [&config_path](CLI::App* sub) {
    sub->add_option("--config", config_path,
                    "JSON object of defaults; command-line flags override it")
        ->expected(1);
  };

  // encode
  auto* encode = app.add_subcommand("encode", "Generate a positional encoding");
  add_config_option(encode);
  std::string enc_kind = "csg";
  std::string enc_size = "8x8";
  int enc_channels = 8;
  std::uint64_t enc_seed = 0;
  std::uint64_t enc_stream = 0;
  std::string enc_resize;
  std::string enc_out = "out";
  layer.bind(encode->add_option("--kind", enc_kind, "csg | spe | fixed"),
             "kind", enc_kind);
  layer.bind(encode->add_option("--size", enc_size, "grid as HxW"), "size",
             enc_size);
  layer.bind(encode->add_option("--channels", enc_channels,
                                "channels (spe: multiple of 4)"),
             "channels", enc_channels);
  layer.bind(encode->add_option("--seed", enc_seed, "seed for fixed encoding"),
             "seed", enc_seed);
  layer.bind(encode->add_option("--stream", enc_stream, "rng stream"),
             "stream", enc_stream);
  layer.bind(encode->add_option("--resize-mode", enc_resize,
                                "interp | expand (recorded in the descriptor)"),
             "resize-mode", enc_resize);
  layer.bind(encode->add_option("--out", enc_out, "output directory"), "out",
             enc_out);

  // analyze
  auto* analyze = app.add_subcommand(
      "analyze", "Monte Carlo + analytic moment maps and stationarity verdict");
  add_config_option(analyze);
  std::string ana_preset;
  std::string ana_net;
  std::string ana_size = "16x16";
  std::uint64_t ana_samples = 100000;
  std::uint64_t ana_seed = 0;
  std::uint64_t ana_stream = 0;
  std::string ana_offsets = "0,0;0,1;1,1;2,2;3,0";
  double ana_z = 5.0;
  int ana_threads = 0;
  std::string ana_out = "out";
  layer.bind(analyze->add_option("--preset", ana_preset,
                                 "built-in pipeline name"),
             "preset", ana_preset);
  layer.bind(analyze->add_option("--net", ana_net, "network JSON file"), "net",
             ana_net);
  layer.bind(analyze->add_option("--size", ana_size, "input grid as HxW"),
             "size", ana_size);
  layer.bind(analyze->add_option("--samples", ana_samples, "Monte Carlo M"),
             "samples", ana_samples);
  layer.bind(analyze->add_option("--seed", ana_seed, "rng seed"), "seed",
             ana_seed);
  layer.bind(analyze->add_option("--stream", ana_stream, "rng base stream"),
             "stream", ana_stream);
  layer.bind(analyze->add_option("--offsets", ana_offsets,
                                 "semicolon-separated di,dj pairs"),
             "offsets", ana_offsets);
  layer.bind(analyze->add_option("--z", ana_z, "verdict z threshold"), "z",
             ana_z);
  layer.bind(analyze->add_option("--threads", ana_threads,
                                 "worker cap (0 = PADLAB_THREADS or hardware)"),
             "threads", ana_threads);
  layer.bind(analyze->add_option("--out", ana_out, "output directory"), "out",
             ana_out);

  // probe
  auto* probe = app.add_subcommand(
      "probe", "Ridge readout of positional information from location stats");
  add_config_option(probe);
  std::string prb_preset;
  std::string prb_net;
  std::string prb_size = "16x16";
  std::uint64_t prb_samples = 100000;
  std::uint64_t prb_seed = 0;
  std::uint64_t prb_stream = 0;
  double prb_lambda = 1e-3;
  int prb_threads = 0;
  std::string prb_out = "out";
  layer.bind(probe->add_option("--preset", prb_preset, "built-in pipeline"),
             "preset", prb_preset);
  layer.bind(probe->add_option("--net", prb_net, "network JSON file"), "net",
             prb_net);
  layer.bind(probe->add_option("--size", prb_size, "input grid as HxW"),
             "size", prb_size);
  layer.bind(probe->add_option("--samples", prb_samples, "Monte Carlo M"),
             "samples", prb_samples);
  layer.bind(probe->add_option("--seed", prb_seed, "rng seed"), "seed",
             prb_seed);
  layer.bind(probe->add_option("--stream", prb_stream, "rng base stream"),
             "stream", prb_stream);
  layer.bind(probe->add_option("--lambda", prb_lambda, "ridge strength"),
             "lambda", prb_lambda);
  layer.bind(probe->add_option("--threads", prb_threads, "worker cap"),
             "threads", prb_threads);
  layer.bind(probe->add_option("--out", prb_out, "output directory"), "out",
             prb_out);

  // schedule
  auto* schedule = app.add_subcommand(
      "schedule", "Draw multi-scale training scales and log frequencies");
  add_config_option(schedule);
  std::string sch_file;
  std::string sch_scales;
  std::string sch_probs;
  std::uint64_t sch_steps = 100000;
  std::uint64_t sch_seed = 0;
  std::string sch_out = "out";
  layer.bind(schedule->add_option("--schedule", sch_file,
                                  "JSON file {\"scales\": [[h,w]..], "
                                  "\"probs\": [..]}"),
             "schedule", sch_file);
  layer.bind(schedule->add_option("--scales", sch_scales,
                                  "comma-separated HxW list"),
             "scales", sch_scales);
  layer.bind(schedule->add_option("--probs", sch_probs,
                                  "comma-separated probabilities"),
             "probs", sch_probs);
  layer.bind(schedule->add_option("--steps", sch_steps, "number of draws"),
             "steps", sch_steps);
  layer.bind(schedule->add_option("--seed", sch_seed, "rng seed"), "seed",
             sch_seed);
  layer.bind(schedule->add_option("--out", sch_out, "output directory"), "out",
             sch_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);
    }
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (!config_path.empty()) {
      layer.load(config_path);
    }
    layer.apply();

    if (encode->parsed()) {
      const json echo{{"kind", enc_kind},       {"size", enc_size},
                      {"channels", enc_channels}, {"seed", enc_seed},
                      {"stream", enc_stream},   {"resize-mode", enc_resize},
                      {"out", enc_out},         {"config", config_path}};
      return cmd_encode(enc_kind, enc_size, enc_channels, enc_seed, enc_stream,
                        enc_resize, enc_out, echo, started);
    }
    if (analyze->parsed()) {
      const json echo{{"preset", ana_preset},   {"net", ana_net},
                      {"size", ana_size},       {"samples", ana_samples},
                      {"seed", ana_seed},       {"stream", ana_stream},
                      {"offsets", ana_offsets}, {"z", ana_z},
                      {"threads", ana_threads}, {"out", ana_out},
                      {"config", config_path}};
      return cmd_analyze(ana_preset, ana_net, ana_size, ana_samples, ana_seed,
                         ana_stream, ana_offsets, ana_z, ana_threads, ana_out,
                         echo, started);
    }
    if (probe->parsed()) {
      const json echo{{"preset", prb_preset},   {"net", prb_net},
                      {"size", prb_size},       {"samples", prb_samples},
                      {"seed", prb_seed},       {"stream", prb_stream},
                      {"lambda", prb_lambda},   {"threads", prb_threads},
                      {"out", prb_out},         {"config", config_path}};
      return cmd_probe(prb_preset, prb_net, prb_size, prb_samples, prb_seed,
                       prb_stream, prb_lambda, prb_threads, prb_out, echo,
                       started);
    }
    if (schedule->parsed()) {
      const json echo{{"schedule", sch_file}, {"scales", sch_scales},
                      {"probs", sch_probs},   {"steps", sch_steps},
                      {"seed", sch_seed},     {"out", sch_out},
                      {"config", config_path}};
      return cmd_schedule(sch_file, sch_scales, sch_probs, sch_steps, sch_seed,
                          sch_out, echo, started);
    }
    std::cerr << "error: no subcommand given\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

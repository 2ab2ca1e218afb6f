#include "padlab/report_io.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "padlab/featuremap_io.hpp"
#include "padlab/hash.hpp"

namespace padlab {

namespace {

using nlohmann::json;

json mapping_json(const PgmMapping& mapping) {
  return json{{"min", mapping.min}, {"max", mapping.max}};
}

// z-deviation of estimate vs exact in SE units; exact matches count as zero.
double deviation_z(double estimate, double exact, double se) {
  const double dev = std::abs(estimate - exact);
  if (dev == 0.0) return 0.0;
  if (se == 0.0) return std::numeric_limits<double>::infinity();
  return dev / se;
}

}  // namespace

EmittedFile write_file(const std::filesystem::path& dir,
                       const std::string& name, const std::string& bytes) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path path = dir / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot open '" + path.string() + "' for writing");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw ConfigError("failed writing '" + path.string() + "'");
  }
  return EmittedFile{name, fnv1a64_hex(bytes)};
}

std::string offset_tag(const Offset& offset) {
  const auto part = [](int v) {
    return v < 0 ? "m" + std::to_string(-v) : std::to_string(v);
  };
  return part(offset.di) + "_" + part(offset.dj);
}

namespace {

std::string stat_table_csv(const StatReport& report) {
  std::string out = "channel,y,x,estimate,se\n";
  for (int c = 0; c < report.channels; ++c) {
    for (int y = 0; y < report.size.height; ++y) {
      for (int x = 0; x < report.size.width; ++x) {
        const auto idx = static_cast<std::size_t>(report.index(c, y, x));
        out += std::to_string(c) + "," + std::to_string(y) + "," +
               std::to_string(x) + "," +
               format_double(report.expectation[idx]) + "," +
               format_double(report.se[idx]) + "\n";
      }
    }
  }
  return out;
}

std::string offset_table_csv(const OffsetStat& stat, int channels) {
  std::string out = "channel,y,x,estimate,se\n";
  for (int c = 0; c < channels; ++c) {
    for (int r = 0; r < stat.rows; ++r) {
      for (int q = 0; q < stat.cols; ++q) {
        const auto idx = static_cast<std::size_t>(stat.index(c, r, q));
        out += std::to_string(c) + "," + std::to_string(stat.anchor_y0 + r) +
               "," + std::to_string(stat.anchor_x0 + q) + "," +
               format_double(stat.mean[idx]) + "," +
               format_double(stat.se[idx]) + "\n";
      }
    }
  }
  return out;
}

}  // namespace

std::vector<EmittedFile> export_stat_report(
    const std::filesystem::path& dir, const StatReport& report,
    const StationarityVerdict& verdict, const StatReport* analytic,
    const std::string& net_hash) {
  std::vector<EmittedFile> files;
  json mappings;

  files.push_back(write_file(dir, "expectation.csv", stat_table_csv(report)));
  for (int c = 0; c < report.channels; ++c) {
    const std::int64_t cells = report.size.cells();
    std::vector<double> plane(
        report.expectation.begin() + c * cells,
        report.expectation.begin() + (c + 1) * cells);
    PgmMapping mapping;
    const std::string name = "expectation_c" + std::to_string(c) + ".pgm";
    files.push_back(
        write_file(dir, name, values_pgm(plane, report.size, mapping)));
    mappings[name] = mapping_json(mapping);

    std::vector<double> anchor(
        verdict.anchor_map.begin() + c * cells,
        verdict.anchor_map.begin() + (c + 1) * cells);
    // Infinite z-scores (exact reports) render as the largest finite bucket.
    for (double& v : anchor) {
      if (std::isinf(v)) v = v > 0 ? 1e308 : -1e308;
    }
    PgmMapping anchor_mapping;
    const std::string anchor_name = "anchor_map_c" + std::to_string(c) + ".pgm";
    files.push_back(write_file(dir, anchor_name,
                               values_pgm(anchor, report.size, anchor_mapping)));
    mappings[anchor_name] = mapping_json(anchor_mapping);
  }

  for (const OffsetStat& stat : report.offsets) {
    const std::string tag = offset_tag(stat.offset);
    files.push_back(write_file(dir, "autocorr_" + tag + ".csv",
                               offset_table_csv(stat, report.channels)));
    const GridSize window{stat.rows, stat.cols};
    for (int c = 0; c < report.channels; ++c) {
      const std::int64_t cells = window.cells();
      std::vector<double> plane(stat.mean.begin() + c * cells,
                                stat.mean.begin() + (c + 1) * cells);
      PgmMapping mapping;
      const std::string name =
          "autocorr_" + tag + "_c" + std::to_string(c) + ".pgm";
      files.push_back(write_file(dir, name, values_pgm(plane, window, mapping)));
      mappings[name] = mapping_json(mapping);
    }
  }

  json doc;
  doc["net_hash"] = net_hash;
  doc["seed"] = report.rng.seed;
  doc["stream"] = report.rng.stream;
  doc["samples"] = report.samples;
  doc["z_threshold"] = verdict.z_threshold;
  doc["verdict"] = {
      {"expectation_uniform", verdict.expectation_uniform},
      {"expectation_max_z", verdict.expectation_max_z},
      {"offsets_consistent", verdict.offsets_consistent},
      {"stationary", verdict.stationary()},
  };
  doc["verdict"]["offsets"] = json::array();
  for (const OffsetVerdict& ov : verdict.offsets) {
    doc["verdict"]["offsets"].push_back({{"di", ov.offset.di},
                                         {"dj", ov.offset.dj},
                                         {"consistent", ov.consistent},
                                         {"max_z", ov.max_z}});
  }

  if (analytic != nullptr) {
    double max_e_z = 0.0;
    for (std::size_t i = 0; i < report.expectation.size(); ++i) {
      max_e_z = std::max(max_e_z,
                         deviation_z(report.expectation[i],
                                     analytic->expectation[i], report.se[i]));
    }
    double max_r_z = 0.0;
    for (std::size_t k = 0; k < report.offsets.size(); ++k) {
      const OffsetStat& mc = report.offsets[k];
      const OffsetStat& ex = analytic->offsets[k];
      for (std::size_t i = 0; i < mc.mean.size(); ++i) {
        max_r_z = std::max(
            max_r_z, deviation_z(mc.mean[i], ex.mean[i], mc.se[i]));
      }
    }
    doc["analytic"] = {{"present", true},
                       {"max_expectation_z", max_e_z},
                       {"max_autocorr_z", max_r_z}};
    files.push_back(
        write_file(dir, "analytic_expectation.csv", stat_table_csv(*analytic)));
    for (const OffsetStat& stat : analytic->offsets) {
      files.push_back(write_file(dir,
                                 "analytic_autocorr_" + offset_tag(stat.offset) +
                                     ".csv",
                                 offset_table_csv(stat, analytic->channels)));
    }
  } else {
    doc["analytic"] = {{"present", false}};
  }

  files.push_back(write_file(dir, "pgm_mappings.json", mappings.dump(2) + "\n"));
  files.push_back(write_file(dir, "report.json", doc.dump(2) + "\n"));
  return files;
}

std::vector<EmittedFile> export_probe_result(const std::filesystem::path& dir,
                                             const ProbeResult& result) {
  std::vector<EmittedFile> files;

  json doc;
  doc["lambda"] = result.lambda;
  doc["split"] = result.split;
  doc["grid"] = {{"height", result.grid.height}, {"width", result.grid.width}};
  doc["r2"] = {result.r2[0], result.r2[1]};
  doc["score"] = positional_info_score(result);
  doc["coefficients"] = {{"row", result.coefficients[0]},
                         {"col", result.coefficients[1]}};

  PgmMapping mapping;
  files.push_back(write_file(dir, "probe_error_map.pgm",
                             values_pgm(result.error_map, result.grid, mapping)));
  json mappings;
  mappings["probe_error_map.pgm"] = mapping_json(mapping);
  files.push_back(write_file(dir, "pgm_mappings.json", mappings.dump(2) + "\n"));

  std::string error_csv = "y,x,squared_error\n";
  for (int y = 0; y < result.grid.height; ++y) {
    for (int x = 0; x < result.grid.width; ++x) {
      error_csv +=
          std::to_string(y) + "," + std::to_string(x) + "," +
          format_double(result.error_map[static_cast<std::size_t>(y) *
                                             result.grid.width +
                                         x]) +
          "\n";
    }
  }
  files.push_back(write_file(dir, "probe_error_map.csv", error_csv));
  files.push_back(write_file(dir, "probe.json", doc.dump(2) + "\n"));
  return files;
}

std::vector<EmittedFile> export_encoding(const std::filesystem::path& dir,
                                         const EncodingKind& kind,
                                         const FeatureMap& map,
                                         std::optional<ResizeMode> mode) {
  std::vector<EmittedFile> files;
  files.push_back(write_file(dir, "encoding.csv", feature_map_csv(map)));

  json mappings;
  for (int c = 0; c < map.channels(); ++c) {
    PgmMapping mapping;
    const std::string name = "encoding_c" + std::to_string(c) + ".pgm";
    files.push_back(write_file(dir, name, feature_map_pgm(map, c, mapping)));
    mappings[name] = mapping_json(mapping);
  }
  files.push_back(write_file(dir, "pgm_mappings.json", mappings.dump(2) + "\n"));

  json doc;
  switch (kind.tag) {
    case EncodingKindTag::Csg:
      doc["kind"] = "csg";
      doc["convention"] = kind.csg_convention == CsgConvention::Normalized
                              ? "normalized"
                              : "align-corners";
      break;
    case EncodingKindTag::Spe:
      doc["kind"] = "spe";
      doc["frequencies"] = spe_frequencies(kind.channels);
      break;
    case EncodingKindTag::FixedConstant:
      doc["kind"] = "fixed-constant";
      doc["seed"] = kind.rng.seed;
      doc["stream"] = kind.rng.stream;
      break;
  }
  doc["channels"] = map.channels();
  doc["grid"] = {{"height", map.height()}, {"width", map.width()}};
  if (mode.has_value()) {
    doc["resize_mode"] = *mode == ResizeMode::Interp ? "interp" : "expand";
  }
  files.push_back(write_file(dir, "encoding.json", doc.dump(2) + "\n"));
  return files;
}

std::vector<EmittedFile> export_schedule_draws(
    const std::filesystem::path& dir, const ScaleSchedule& schedule,
    const std::vector<ScaleDraw>& draws) {
  std::vector<EmittedFile> files;

  std::string log = "step,scale_index,height,width\n";
  std::vector<std::int64_t> counts(schedule.scales.size(), 0);
  for (const ScaleDraw& draw : draws) {
    log += std::to_string(draw.step) + "," + std::to_string(draw.scale_index) +
           "," + std::to_string(draw.scale.height) + "," +
           std::to_string(draw.scale.width) + "\n";
    counts[static_cast<std::size_t>(draw.scale_index)] += 1;
  }
  files.push_back(write_file(dir, "draws.csv", log));

  std::string freq = "scale_index,height,width,probability,count,empirical\n";
  for (std::size_t i = 0; i < schedule.scales.size(); ++i) {
    const double empirical =
        draws.empty() ? 0.0
                      : static_cast<double>(counts[i]) /
                            static_cast<double>(draws.size());
    freq += std::to_string(i) + "," +
            std::to_string(schedule.scales[i].height) + "," +
            std::to_string(schedule.scales[i].width) + "," +
            format_double(schedule.probabilities[i]) + "," +
            std::to_string(counts[i]) + "," + format_double(empirical) + "\n";
  }
  files.push_back(write_file(dir, "frequencies.csv", freq));
  return files;
}

}  // namespace padlab

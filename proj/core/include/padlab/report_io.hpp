#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "padlab/mspie.hpp"
#include "padlab/posenc.hpp"
#include "padlab/probe.hpp"
#include "padlab/stats.hpp"
#include "padlab/verdict.hpp"

namespace padlab {

struct EmittedFile {
  std::string name;  // relative to the export directory
  std::string hash;  // fnv1a64 of the bytes written
};

// Writes `bytes` under dir/name and records the content hash.
EmittedFile write_file(const std::filesystem::path& dir,
                       const std::string& name, const std::string& bytes);

// StatReport exports: CSV tables (channel, y, x, estimate, se) for the
// expectation and every offset, P2 heatmaps of the expectation, anchor map
// and autocorrelations with one shared sidecar of affine mappings, and a
// deterministic report.json carrying the verdict and, when present, the
// analytic comparison summary.
std::vector<EmittedFile> export_stat_report(
    const std::filesystem::path& dir, const StatReport& report,
    const StationarityVerdict& verdict, const StatReport* analytic,
    const std::string& net_hash);

std::vector<EmittedFile> export_probe_result(const std::filesystem::path& dir,
                                             const ProbeResult& result);

// Encoding exports: the feature-map CSV, per-channel PGM heatmaps, and a
// descriptor with kind, channels, grid, resize mode and (for SPE) the
// frequency list.
std::vector<EmittedFile> export_encoding(const std::filesystem::path& dir,
                                         const EncodingKind& kind,
                                         const FeatureMap& map,
                                         std::optional<ResizeMode> mode);

// Draw log plus empirical frequencies for a schedule run.
std::vector<EmittedFile> export_schedule_draws(
    const std::filesystem::path& dir, const ScaleSchedule& schedule,
    const std::vector<ScaleDraw>& draws);

// Filename fragment for an offset: "0_1", "m2_0", ...
std::string offset_tag(const Offset& offset);

}  // namespace padlab

#include "padlab/verdict.hpp"

#include <algorithm>
#include <cmath>

namespace padlab {

namespace {

// z-score of a deviation against a standard error; exact agreement counts as
// zero even when the SE is zero (analytic reports).
double z_score(double deviation, double se) {
  if (deviation == 0.0) return 0.0;
  if (se == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(deviation) / se;
}

double spatial_median(std::vector<double> values) {
  const std::size_t n = values.size();
  std::sort(values.begin(), values.end());
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

StationarityVerdict stationarity_verdict(const StatReport& report,
                                         double z_threshold) {
  if (report.expectation.empty() || report.se.size() != report.expectation.size()) {
    throw DimensionError("report carries no expectation/SE maps");
  }
  StationarityVerdict verdict;
  verdict.z_threshold = z_threshold;

  const std::int64_t cells = report.size.cells();
  verdict.anchor_map.resize(report.expectation.size());
  verdict.expectation_max_z = 0.0;
  for (int c = 0; c < report.channels; ++c) {
    const auto first = report.expectation.begin() + c * cells;
    std::vector<double> channel(first, first + cells);
    double mean = 0.0;
    for (double v : channel) mean += v;
    mean /= static_cast<double>(cells);
    const double median = spatial_median(channel);

    for (std::int64_t e = 0; e < cells; ++e) {
      const std::size_t idx = static_cast<std::size_t>(c * cells + e);
      const double se = report.se[idx];
      verdict.expectation_max_z = std::max(
          verdict.expectation_max_z, z_score(report.expectation[idx] - mean, se));
      const double dev = report.expectation[idx] - median;
      verdict.anchor_map[idx] =
          dev == 0.0 ? 0.0
                     : (se == 0.0 ? std::numeric_limits<double>::infinity()
                                  : dev / se);
    }
  }
  verdict.expectation_uniform = verdict.expectation_max_z <= z_threshold;

  verdict.offsets_consistent = true;
  for (const OffsetStat& stat : report.offsets) {
    OffsetVerdict ov;
    ov.offset = stat.offset;
    const std::int64_t window = std::int64_t{stat.rows} * stat.cols;
    for (int c = 0; c < report.channels; ++c) {
      double mean = 0.0;
      for (std::int64_t e = 0; e < window; ++e) {
        mean += stat.mean[c * window + e];
      }
      mean /= static_cast<double>(window);
      for (int r = 0; r < stat.rows; ++r) {
        for (int q = 0; q < stat.cols; ++q) {
          const std::size_t idx =
              static_cast<std::size_t>(stat.index(c, r, q));
          const double z = z_score(stat.mean[idx] - mean, stat.se[idx]);
          if (z > ov.max_z) {
            ov.max_z = z;
            ov.argmax_y = stat.anchor_y0 + r;
            ov.argmax_x = stat.anchor_x0 + q;
          }
        }
      }
    }
    ov.consistent = ov.max_z <= z_threshold;
    verdict.offsets_consistent = verdict.offsets_consistent && ov.consistent;
    verdict.offsets.push_back(ov);
  }
  return verdict;
}

}  // namespace padlab

#pragma once

#include <vector>

#include "padlab/stats.hpp"

namespace padlab {

struct OffsetVerdict {
  Offset offset;
  bool consistent = false;
  double max_z = 0.0;
  // Output location of the worst deviation (channel-flattened entry).
  int argmax_y = 0;
  int argmax_x = 0;
};

// Weak-stationarity checks in standard-error units.
//
// The expectation map is uniform when every entry stays within z_threshold
// SEs of its spatial mean; the autocorrelation is offset-consistent when, for
// each offset, every anchor stays within z_threshold SEs of the spatial mean
// at that offset. The anchor map records (E - spatial median) / SE per entry,
// exposing locations that carry a fixed spatial bias.
struct StationarityVerdict {
  bool expectation_uniform = false;
  double expectation_max_z = 0.0;
  std::vector<OffsetVerdict> offsets;
  bool offsets_consistent = false;
  std::vector<double> anchor_map;  // [C][H][W]
  double z_threshold = 0.0;

  bool stationary() const { return expectation_uniform && offsets_consistent; }
};

StationarityVerdict stationarity_verdict(const StatReport& report,
                                         double z_threshold);

}  // namespace padlab

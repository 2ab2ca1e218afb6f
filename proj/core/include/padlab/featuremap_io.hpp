#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "padlab/grid.hpp"

namespace padlab {

// Shortest round-trip decimal form of a double, locale-independent.
std::string format_double(double value);

// RFC-4180 field quoting: wraps the field in quotes when it contains a
// comma, quote or newline.
std::string csv_field(const std::string& field);

// One CSV row of W comma-separated values per (channel, y), channels outer.
std::string feature_map_csv(const FeatureMap& map);

// Parses the row-per-(channel, y) layout back given the expected shape.
FeatureMap feature_map_from_csv(const std::string& text, int channels,
                                GridSize size);

// Affine mapping used to quantize one channel into 16-bit PGM samples.
// max == min marks a constant channel; all samples are written as zero.
struct PgmMapping {
  double min = 0.0;
  double max = 0.0;
};

// Plain-text PGM (P2, maxval 65535) of one channel; values are mapped
// affinely onto 0..65535 and the mapping is reported for the sidecar.
std::string feature_map_pgm(const FeatureMap& map, int channel,
                            PgmMapping& mapping);

// Grayscale P2 rendering of an arbitrary H x W value grid.
std::string values_pgm(const std::vector<double>& values, GridSize size,
                       PgmMapping& mapping);

}  // namespace padlab

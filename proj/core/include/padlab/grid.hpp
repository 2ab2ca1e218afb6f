#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "padlab/errors.hpp"

namespace padlab {

// Spatial extent of a feature map, in cells. Both dimensions must be >= 1.
struct GridSize {
  int height = 0;
  int width = 0;

  friend bool operator==(const GridSize&, const GridSize&) = default;

  std::int64_t cells() const { return std::int64_t{height} * width; }
  std::string str() const;
};

// Throws DimensionError unless height and width are both >= 1.
void validate_grid(const GridSize& size);

// Dense C x H x W grid of doubles in channel-major, row-major order.
// Treated as immutable once it leaves the function that built it; the mutable
// accessors exist for construction only.
class FeatureMap {
 public:
  FeatureMap(int channels, GridSize size, double fill = 0.0);

  // Takes ownership of `values`; checks the element count and that every
  // value is finite.
  static FeatureMap from_values(int channels, GridSize size,
                                std::vector<double> values);

  int channels() const { return channels_; }
  GridSize size() const { return size_; }
  int height() const { return size_.height; }
  int width() const { return size_.width; }

  std::int64_t value_count() const { return values_.size(); }

  std::int64_t index(int c, int y, int x) const {
    return (std::int64_t{c} * size_.height + y) * size_.width + x;
  }

  double at(int c, int y, int x) const { return values_[index(c, y, x)]; }
  double& at(int c, int y, int x) { return values_[index(c, y, x)]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  // Values of one channel, H*W contiguous doubles.
  std::span<const double> channel(int c) const;
  std::span<double> channel(int c);

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  int channels_;
  GridSize size_;
  std::vector<double> values_;
};

// Constant-filled map. Errors on non-positive channel or grid dimensions.
FeatureMap make_map(int channels, GridSize size, double fill);

}  // namespace padlab

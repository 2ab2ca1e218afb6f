#include "padlab/grid.hpp"

#include <cmath>

namespace padlab {

std::string GridSize::str() const {
  return std::to_string(height) + "x" + std::to_string(width);
}

void validate_grid(const GridSize& size) {
  if (size.height < 1 || size.width < 1) {
    throw DimensionError("grid dimensions must be >= 1, got " + size.str());
  }
}

FeatureMap::FeatureMap(int channels, GridSize size, double fill)
    : channels_(channels), size_(size) {
  if (channels < 1) {
    throw DimensionError("channel count must be >= 1, got " +
                         std::to_string(channels));
  }
  validate_grid(size);
  values_.assign(static_cast<std::size_t>(channels) * size.cells(), fill);
}

FeatureMap FeatureMap::from_values(int channels, GridSize size,
                                   std::vector<double> values) {
  FeatureMap map(channels, size, 0.0);
  if (values.size() != map.values_.size()) {
    throw DimensionError("value count " + std::to_string(values.size()) +
                         " does not match " + std::to_string(channels) + "x" +
                         size.str());
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw DimensionError("feature map values must be finite");
    }
  }
  map.values_ = std::move(values);
  return map;
}

std::span<const double> FeatureMap::channel(int c) const {
  return std::span<const double>(values_).subspan(
      static_cast<std::size_t>(c) * size_.cells(), size_.cells());
}

std::span<double> FeatureMap::channel(int c) {
  return std::span<double>(values_).subspan(
      static_cast<std::size_t>(c) * size_.cells(), size_.cells());
}

FeatureMap make_map(int channels, GridSize size, double fill) {
  return FeatureMap(channels, size, fill);
}

}  // namespace padlab

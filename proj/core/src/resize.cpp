#include "padlab/resize.hpp"

#include <cmath>
#include <vector>

namespace padlab {

namespace {

struct AxisSample {
  int lo = 0;
  int hi = 0;
  double frac = 0.0;  // weight of hi
};

// Align-corners source coordinate for target index t: t * (S-1) / (T-1).
// A single-sample target or source axis degenerates to index 0.
std::vector<AxisSample> axis_samples(int source, int target) {
  std::vector<AxisSample> samples(target);
  if (source == 1 || target == 1) {
    return samples;  // all zeros: broadcast / corner pick
  }
  const double scale =
      static_cast<double>(source - 1) / static_cast<double>(target - 1);
  for (int t = 0; t < target; ++t) {
    const double s = t * scale;
    int lo = static_cast<int>(std::floor(s));
    if (lo > source - 2) lo = source - 2;
    double frac = s - lo;
    if (frac < 0.0) frac = 0.0;
    if (frac > 1.0) frac = 1.0;
    samples[t] = {lo, lo + 1, frac};
  }
  // Pin the corners: rounding in scale must not shift them off the exact
  // source samples.
  samples[0] = {0, 1, 0.0};
  samples[target - 1] = {source - 2, source - 1, 1.0};
  return samples;
}

}  // namespace

FeatureMap bilinear_resize(const FeatureMap& map, GridSize target) {
  validate_grid(target);
  if (target == map.size()) {
    return map;
  }
  const auto rows = axis_samples(map.height(), target.height);
  const auto cols = axis_samples(map.width(), target.width);

  FeatureMap out(map.channels(), target, 0.0);
  for (int c = 0; c < map.channels(); ++c) {
    for (int y = 0; y < target.height; ++y) {
      const AxisSample& ry = rows[y];
      for (int x = 0; x < target.width; ++x) {
        const AxisSample& rx = cols[x];
        const double top = map.at(c, ry.lo, rx.lo) * (1.0 - rx.frac) +
                           map.at(c, ry.lo, rx.hi) * rx.frac;
        const double bot = map.at(c, ry.hi, rx.lo) * (1.0 - rx.frac) +
                           map.at(c, ry.hi, rx.hi) * rx.frac;
        out.at(c, y, x) = top * (1.0 - ry.frac) + bot * ry.frac;
      }
    }
  }
  return out;
}

}  // namespace padlab

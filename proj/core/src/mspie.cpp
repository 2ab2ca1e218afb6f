#include "padlab/mspie.hpp"

#include <cmath>
#include <string>

#include "padlab/rng.hpp"

namespace padlab {

namespace {

// Stream tag reserved for schedule draws so they never collide with the
// feature-sampling streams of the same seed.
constexpr std::uint64_t kScaleStream = 0x5343414c45ull;  // "SCALE"

}  // namespace

void ScaleSchedule::validate() const {
  if (scales.empty()) {
    throw ConfigError("scale schedule must list at least one scale");
  }
  if (probabilities.size() != scales.size()) {
    throw ConfigError("schedule needs one probability per scale");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    validate_grid(scales[i]);
    if (probabilities[i] < 0.0) {
      throw ConfigError("schedule probabilities must be non-negative");
    }
    sum += probabilities[i];
    if (i > 0) {
      if (scales[i].height < scales[i - 1].height ||
          scales[i].width < scales[i - 1].width) {
        throw ConfigError("scales must be ascending");
      }
      if (probabilities[i] > probabilities[i - 1]) {
        throw ConfigError(
            "probabilities must be non-increasing: the lower scale carries "
            "the higher probability");
      }
    }
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ConfigError("schedule probabilities must sum to 1, got " +
                      std::to_string(sum));
  }
}

ScaleSchedule ScaleSchedule::default_three_scale() {
  ScaleSchedule schedule;
  schedule.scales = {GridSize{256, 256}, GridSize{384, 384},
                     GridSize{512, 512}};
  schedule.probabilities = {0.5, 0.25, 0.25};
  return schedule;
}

ScaleDraw sample_scale(const ScaleSchedule& schedule, std::uint64_t seed,
                       std::uint64_t step) {
  schedule.validate();
  const double u = uniform01_at(RngSpec{seed, kScaleStream}, step);
  double cumulative = 0.0;
  int index = static_cast<int>(schedule.scales.size()) - 1;
  for (std::size_t i = 0; i < schedule.scales.size(); ++i) {
    cumulative += schedule.probabilities[i];
    if (u < cumulative) {
      index = static_cast<int>(i);
      break;
    }
  }
  return ScaleDraw{step, index, schedule.scales[static_cast<std::size_t>(index)],
                   kScaleStream};
}

FeatureMap prepare_scale_input(const EncodingKind& kind, const FeatureMap& base,
                               GridSize scale, ResizeMode mode) {
  FeatureMap out = resize_encoding(kind, base, scale, mode);
  if (!(out.size() == scale)) {
    throw Error("resized encoding missed the requested scale");
  }
  return out;
}

FeatureMap adaptive_avg_pool_2x2(const FeatureMap& map) {
  if (map.height() < 2 || map.width() < 2) {
    throw DimensionError("adaptive 2x2 pooling needs H, W >= 2, got " +
                         map.size().str());
  }
  FeatureMap out(map.channels(), GridSize{2, 2}, 0.0);
  for (int c = 0; c < map.channels(); ++c) {
    for (int r = 0; r < 2; ++r) {
      const int y0 = r * map.height() / 2;
      const int y1 = (r + 1) * map.height() / 2;
      for (int q = 0; q < 2; ++q) {
        const int x0 = q * map.width() / 2;
        const int x1 = (q + 1) * map.width() / 2;
        double sum = 0.0;
        for (int y = y0; y < y1; ++y) {
          for (int x = x0; x < x1; ++x) {
            sum += map.at(c, y, x);
          }
        }
        out.at(c, r, q) =
            sum / (static_cast<double>(y1 - y0) * (x1 - x0));
      }
    }
  }
  return out;
}

}  // namespace padlab

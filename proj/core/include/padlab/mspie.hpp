#pragma once

#include <cstdint>
#include <vector>

#include "padlab/grid.hpp"
#include "padlab/posenc.hpp"

namespace padlab {

// Multi-scale sampling schedule: ascending scales with non-increasing
// probabilities (the lower scale carries the higher probability).
struct ScaleSchedule {
  std::vector<GridSize> scales;
  std::vector<double> probabilities;

  void validate() const;

  // Three scales 256/384/512 with probabilities [0.5, 0.25, 0.25].
  static ScaleSchedule default_three_scale();
};

struct ScaleDraw {
  std::uint64_t step = 0;
  int scale_index = 0;
  GridSize scale;
  std::uint64_t rng_stream = 0;
};

// Categorical draw for one training step. Deterministic per (schedule, seed,
// step); concurrent evaluation of different steps cannot change any draw.
ScaleDraw sample_scale(const ScaleSchedule& schedule, std::uint64_t seed,
                       std::uint64_t step);

// Per-scale input preparation: delegates to resize_encoding and checks the
// output lands on the requested scale.
FeatureMap prepare_scale_input(const EncodingKind& kind, const FeatureMap& base,
                               GridSize scale, ResizeMode mode);

// 2x2 adaptive average pooling with floor bins: row bin r covers
// [floor(r*H/2), floor((r+1)*H/2)), columns alike. Requires H, W >= 2.
FeatureMap adaptive_avg_pool_2x2(const FeatureMap& map);

}  // namespace padlab

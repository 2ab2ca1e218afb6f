#pragma once

#include <cstdint>
#include <vector>

#include "padlab/conv.hpp"
#include "padlab/grid.hpp"
#include "padlab/rng.hpp"

namespace padlab {

// Spatial offset (di, dj) between two output locations.
struct Offset {
  int di = 0;
  int dj = 0;

  friend bool operator==(const Offset&, const Offset&) = default;
};

using OffsetSet = std::vector<Offset>;

// Raw autocorrelation estimates R(y_i, y_{i+delta}) for one offset, stored
// over the window of anchors i for which i+delta stays inside the output.
// Anchor (r, q) of the window corresponds to output location
// (anchor_y0 + r, anchor_x0 + q).
struct OffsetStat {
  Offset offset;
  int anchor_y0 = 0;
  int anchor_x0 = 0;
  int rows = 0;
  int cols = 0;
  std::vector<double> mean;  // [C][rows][cols]
  std::vector<double> se;

  std::int64_t index(int c, int r, int q) const {
    return (std::int64_t{c} * rows + r) * cols + q;
  }
};

// Per-channel/location expectation, variance and standard errors, plus raw
// autocorrelation estimates per offset. `samples == 0` marks an exact
// analytic report (all standard errors zero).
struct StatReport {
  int channels = 0;
  GridSize size;
  std::vector<double> expectation;  // [C][H][W]
  std::vector<double> variance;
  std::vector<double> se;
  std::vector<OffsetStat> offsets;
  std::uint64_t samples = 0;
  RngSpec rng;

  std::int64_t index(int c, int y, int x) const {
    return (std::int64_t{c} * size.height + y) * size.width + x;
  }
};

struct EstimateOptions {
  // 0 resolves through PADLAB_THREADS, then hardware concurrency.
  int threads = 0;
};

// Worker count for a requested value (see EstimateOptions::threads).
int resolve_thread_count(int requested);

// Monte Carlo estimate of the expectation map and the raw autocorrelation at
// each offset, over `samples` i.i.d. N(0,1) inputs. Sample s draws from
// stream rng.stream + s, so the estimate is a pure function of (rng, samples)
// regardless of worker count: samples are accumulated with Welford updates in
// fixed-size chunks and the per-chunk accumulators are merged by a fixed
// pairwise tree.
StatReport estimate_moments(const NetworkSpec& net, GridSize input_size,
                            const OffsetSet& offsets, std::uint64_t samples,
                            const RngSpec& rng,
                            const EstimateOptions& options = {});

// Validates offsets against an output extent (non-empty, |d| < extent).
void validate_offsets(const OffsetSet& offsets, GridSize output);

namespace detail {

// Same estimator with the non-empty-offsets requirement lifted; the
// location-statistics path shares the sample stream this way.
StatReport estimate_moments_impl(const NetworkSpec& net, GridSize input_size,
                                 const OffsetSet& offsets,
                                 std::uint64_t samples, const RngSpec& rng,
                                 const EstimateOptions& options);

}  // namespace detail

}  // namespace padlab

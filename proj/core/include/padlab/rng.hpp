#pragma once

#include <array>
#include <cstdint>

#include "padlab/grid.hpp"

namespace padlab {

// Identifies one random stream. A draw is a pure function of
// (seed, stream, index): re-evaluating any index gives the same value no
// matter which thread asks or in which order. Parallel sampling partitions
// work by stream (one stream per Monte Carlo sample).
struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  friend bool operator==(const RngSpec&, const RngSpec&) = default;
};

namespace detail {

// Philox4x32-10 block cipher (Salmon et al., SC'11). The 128-bit counter is
// laid out as [ctr_lo, ctr_hi, stream_lo, stream_hi] and the 64-bit key
// carries the seed. Constants are the reference ones, so the output is
// reproducible across platforms.
std::array<std::uint32_t, 4> philox4x32(std::uint64_t counter,
                                        std::uint64_t stream,
                                        std::uint64_t seed);

}  // namespace detail

// Uniform double in [0, 1) at `index` of the stream.
double uniform01_at(const RngSpec& rng, std::uint64_t index);

// Standard normal draw at `index` of the stream (Box-Muller on one Philox
// block per pair of indices; index 2k and 2k+1 share a block).
double normal_at(const RngSpec& rng, std::uint64_t index);

// I.i.d. N(0,1) map; value at flat index f equals normal_at(rng, f).
FeatureMap sample_gaussian(int channels, GridSize size, const RngSpec& rng);

}  // namespace padlab

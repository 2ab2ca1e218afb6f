#pragma once

#include <array>
#include <vector>

#include "padlab/grid.hpp"
#include "padlab/rng.hpp"

namespace padlab {

// Index-to-coordinate convention of the Cartesian grid.
//
// Normalized is the literal 2*(i/H - 1/2) mapping over i in {0..H-1}: the
// top-left corner is exactly (-1,-1) and the center of an even grid is
// exactly (0,0), but the bottom-right corner is (1-2/H, 1-2/W). AlignCorners
// uses 2*(i/(H-1) - 1/2) instead, which pins all four corners to +-1 (a 1x1
// axis degenerates to 0).
enum class CsgConvention { Normalized, AlignCorners };

// Two-channel Cartesian spatial grid: channel 0 encodes the row coordinate,
// channel 1 the column coordinate.
FeatureMap csg(GridSize size,
               CsgConvention convention = CsgConvention::Normalized);

// Encoding vector at one location.
std::array<double, 2> csg_at(GridSize size, int i, int j,
                             CsgConvention convention =
                                 CsgConvention::Normalized);

// Translates the Normalized encoding at (i, j) by (di, dj): adds
// 2*(di/H, dj/W). Evaluated over a common denominator so the result equals
// csg_at(size, i+di, j+dj) bit-exactly. Both locations must be inside the
// grid.
std::array<double, 2> csg_translate(GridSize size, int i, int j, int di,
                                    int dj);

// Geometric frequencies for one axis: omega_k = 1/10000^(2k/d) for
// k = 0..d/2-1, where d = total_channels/2 is the per-axis encoding
// dimension. Strictly decreasing, omega_0 = 1.
std::vector<double> spe_frequencies(int total_channels);

// Sinusoidal positional encoding with `channels` total channels (divisible
// by 4). The first half encodes the row index i, the second half the column
// index j; within each half channels alternate
// [sin(w_0 t), cos(w_0 t), sin(w_1 t), cos(w_1 t), ...]. Values depend only
// on the index, never on the grid extent, so a larger grid extends a smaller
// one bit-identically. Location vectors are pairwise distinct until an index
// wraps the base frequency's period: extents below 2*pi*10^4 are safe.
FeatureMap spe(GridSize size, int channels);

// Moves a (sin, cos) column from position i' to i'+phi via the rotation
//   [  cos(w*phi)  sin(w*phi) ]
//   [ -sin(w*phi)  cos(w*phi) ],
// which depends on the offset only, not on i'.
std::array<double, 2> spe_rotate(const std::array<double, 2>& sin_cos, int phi,
                                 double omega);

// Frozen random encoding: a deterministic standard-normal map that gives
// every location a distinct channel vector. Stands in for a trained constant
// input.
FeatureMap fixed_constant(int channels, GridSize size, const RngSpec& rng);

enum class ResizeMode { Interp, Expand };

enum class EncodingKindTag { Csg, Spe, FixedConstant };

// Encoding descriptor: carries everything needed to (re)generate the map.
struct EncodingKind {
  EncodingKindTag tag = EncodingKindTag::Csg;
  int channels = 2;
  RngSpec rng;
  CsgConvention csg_convention = CsgConvention::Normalized;

  static EncodingKind make_csg(
      CsgConvention convention = CsgConvention::Normalized);
  static EncodingKind make_spe(int channels);
  static EncodingKind make_fixed_constant(int channels, const RngSpec& rng);

  friend bool operator==(const EncodingKind&, const EncodingKind&) = default;
};

// Generates the encoding at the given grid size.
FeatureMap make_encoding(const EncodingKind& kind, GridSize size);

// Interp resizes by bilinear interpolation; Expand regenerates an SPE at the
// target size (shared index range bit-identical, new positions get new
// codes). Expand on any other kind is unsupported.
FeatureMap resize_encoding(const EncodingKind& kind, const FeatureMap& current,
                           GridSize target, ResizeMode mode);

// Positional-aligned noise: pe + sigma * N(0,1), same shape, one noise value
// per flat index of the stream.
FeatureMap compose_noise_pe(const FeatureMap& pe, const RngSpec& rng,
                            double sigma = 1.0);

}  // namespace padlab

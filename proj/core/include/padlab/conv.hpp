#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "padlab/grid.hpp"
#include "padlab/resize.hpp"

namespace padlab {

enum class PaddingKind { None, Zero, Reflect, Circular };

// None means valid convolution. Reflect mirrors without repeating the border
// sample (the edge value appears once) and requires pad < min(H, W) of any
// map it is applied to. Circular wraps indices modulo the extent.
struct PaddingMode {
  PaddingKind kind = PaddingKind::None;
  int pad = 0;

  static PaddingMode none() { return {PaddingKind::None, 0}; }
  static PaddingMode zero(int pad) { return {PaddingKind::Zero, pad}; }
  static PaddingMode reflect(int pad) { return {PaddingKind::Reflect, pad}; }
  static PaddingMode circular(int pad) { return {PaddingKind::Circular, pad}; }

  friend bool operator==(const PaddingMode&, const PaddingMode&) = default;
};

// Stride-1 cross-correlation layer. Weights are stored
// [out_channel][in_channel][ky][kx], one bias per out channel.
struct ConvLayer {
  int out_channels = 0;
  int in_channels = 0;
  int kh = 0;
  int kw = 0;
  std::vector<double> weights;
  std::vector<double> bias;
  PaddingMode padding;

  std::int64_t weight_index(int oc, int ic, int ky, int kx) const {
    return ((std::int64_t{oc} * in_channels + ic) * kh + ky) * kw + kx;
  }
  double weight(int oc, int ic, int ky, int kx) const {
    return weights[weight_index(oc, ic, ky, kx)];
  }

  // All-`value` kernel, one shared bias. Handy for the uniform-kernel nets
  // used throughout the tests and presets.
  static ConvLayer filled(int out_channels, int in_channels, int kh, int kw,
                          double value, double bias, PaddingMode padding);

  void validate() const;

  friend bool operator==(const ConvLayer&, const ConvLayer&) = default;
};

enum class ActKind { Identity, LeakyReLU };

struct Activation {
  ActKind kind = ActKind::Identity;
  double gamma = 0.0;  // negative slope, in [0, 1)

  static Activation identity() { return {ActKind::Identity, 0.0}; }
  static Activation leaky_relu(double gamma);

  friend bool operator==(const Activation&, const Activation&) = default;
};

struct Upsample {
  GridSize target;

  friend bool operator==(const Upsample&, const Upsample&) = default;
};

using Stage = std::variant<ConvLayer, Activation, Upsample>;

// An ordered pipeline of convolutions, activations and bilinear upsamples.
struct NetworkSpec {
  std::vector<Stage> stages;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

// Output spatial size of `layer` on `in`: H' = H + 2*pad - kh + 1, same for
// width. Throws DimensionError when the kernel exceeds the padded input or a
// reflect pad is too large.
GridSize conv_output_size(GridSize in, const ConvLayer& layer);

FeatureMap conv2d(const FeatureMap& input, const ConvLayer& layer);

FeatureMap activate(const FeatureMap& input, const Activation& act);

// Applies stages in order; stage errors are rethrown with the stage index
// attached.
FeatureMap forward(const NetworkSpec& net, const FeatureMap& input);

// Channel count the first conv stage expects; 1 when the net has no convs.
int required_input_channels(const NetworkSpec& net);

// (channels, size) of the output for an input of the given shape. Validates
// the stage chain.
std::pair<int, GridSize> output_shape(const NetworkSpec& net, int in_channels,
                                      GridSize in);

// True when every stage is a Conv, an Upsample, or an Identity activation.
bool is_linear(const NetworkSpec& net);

// Rewrites a Zero-padded pipeline into a padding-free one with the same
// declared output size. Each existing Upsample target grows to absorb the
// kernel shrinkage of the valid convolutions that follow it; when the walk
// reaches the input, the required input size is enlarged instead and
// returned. Stages in front of an Upsample keep their shape arithmetic
// relative to the upsample's original target. Reflect or Circular stages are
// unsupported.
std::pair<NetworkSpec, GridSize> strip_padding(const NetworkSpec& net,
                                               GridSize final_size);

namespace detail {

// Source index along one axis for a padded coordinate `pos` in
// [-pad, extent+pad), or -1 when the tap reads a literal zero.
int resolve_axis_index(int pos, int extent, PaddingKind kind);

// Lookup table over the padded axis: entry p maps padded coordinate p - pad.
std::vector<int> padded_axis_map(int extent, int pad, PaddingKind kind);

// Validates a padding/extent combination (reflect pad bound).
void check_padding(const PaddingMode& mode, GridSize in);

}  // namespace detail

}  // namespace padlab

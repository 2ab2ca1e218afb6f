#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "padlab/conv.hpp"
#include "padlab/stats.hpp"

namespace padlab {

// One output entry of a linear pipeline, written as an affine form over the
// network-input variables: sum of coeff * x_id plus a constant carrying the
// accumulated biases. Ids are flat indices into the input map; taps that read
// literal zeros (Zero padding) simply contribute no term, mirrored and
// wrapped taps (Reflect / Circular) land on the underlying real id.
struct LinearForm {
  std::vector<std::pair<std::int64_t, double>> terms;  // sorted by id
  double constant = 0.0;
};

// Affine forms of every output entry of a linear pipeline.
struct LinearCoeffMap {
  int channels = 0;
  GridSize size;
  int input_channels = 0;
  GridSize input_size;
  std::vector<LinearForm> forms;  // [C][H][W]

  std::int64_t index(int c, int y, int x) const {
    return (std::int64_t{c} * size.height + y) * size.width + x;
  }
};

// Composes the per-stage index maps of a Conv/Upsample pipeline into one
// coefficient map. Throws UnsupportedError on non-Identity activations.
LinearCoeffMap build_coeff_map(const NetworkSpec& net, int input_channels,
                               GridSize input_size);

// Exact expectation and raw autocorrelation of a linear pipeline on i.i.d.
// N(0,1) input:
//   E(i)    = constant_i
//   R(i, j) = sum over shared ids of coeff_i * coeff_j + constant_i * constant_j
// Returned as a StatReport with samples = 0 and zero standard errors.
StatReport analytic_moments(const NetworkSpec& net, GridSize input_size,
                            const OffsetSet& offsets);

// E[LeakyReLU(X)] for X ~ N(mu, sigma^2) with negative slope gamma:
//   gamma*mu*Phi(-mu/sigma) + mu*Phi(mu/sigma) + (1-gamma)*sigma*phi(mu/sigma)
// For mu = 0 this is (1-gamma)*sigma/sqrt(2*pi).
double leaky_relu_gaussian_mean(double mu, double sigma, double gamma);

// Closed-form expectation map of conv -> LeakyReLU(gamma) -> conv on i.i.d.
// N(0,1) input. Both layers must be single-channel: each layer-1 output is
// then exactly Gaussian with mean bias1 and sigma the l2 norm of its
// surviving tap coefficients, and the layer-2 expectation is the padded
// linear combination of the per-location LeakyReLU means plus bias2.
// Multi-channel layers are out of closed form; use estimate_moments instead.
FeatureMap two_layer_expectation(const ConvLayer& layer1, double gamma,
                                 const ConvLayer& layer2, GridSize input_size);

// Checks Appendix-style bias invariance on a linear net: adding b to every
// output must shift each R(i, j) by exactly b^2 when the net's expectation is
// zero. Returns the max |difference - b^2| over all entries and offsets.
double bias_shift_check(const NetworkSpec& net, GridSize input_size,
                        const OffsetSet& offsets, double b);

}  // namespace padlab

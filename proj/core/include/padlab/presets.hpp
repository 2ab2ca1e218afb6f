#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "padlab/conv.hpp"

namespace padlab {

// Built-in single-channel pipelines used by the CLI and the test suites:
//
//   nopad-linear     3x3 all-ones conv, bias 0.5, no padding
//   zeropad-2layer   3x3 all-ones conv (Zero(1)) -> LeakyReLU(0.2)
//                    -> 3x3 all-ones conv (Zero(1)), biases 0
//   reflect-linear   3x3 all-ones conv, bias 0, Reflect(1)
//   circular-linear  3x3 all-ones conv, bias 0, Circular(1)
NetworkSpec preset_network(std::string_view name);

const std::vector<std::string>& preset_names();

inline constexpr double kPresetLeakySlope = 0.2;

}  // namespace padlab

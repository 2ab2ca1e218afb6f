#include "padlab/presets.hpp"

#include "padlab/errors.hpp"

namespace padlab {

namespace {

ConvLayer ones3x3(double bias, PaddingMode padding) {
  return ConvLayer::filled(1, 1, 3, 3, 1.0, bias, padding);
}

}  // namespace

NetworkSpec preset_network(std::string_view name) {
  NetworkSpec net;
  if (name == "nopad-linear") {
    net.stages.push_back(ones3x3(0.5, PaddingMode::none()));
  } else if (name == "zeropad-2layer") {
    net.stages.push_back(ones3x3(0.0, PaddingMode::zero(1)));
    net.stages.push_back(Activation::leaky_relu(kPresetLeakySlope));
    net.stages.push_back(ones3x3(0.0, PaddingMode::zero(1)));
  } else if (name == "reflect-linear") {
    net.stages.push_back(ones3x3(0.0, PaddingMode::reflect(1)));
  } else if (name == "circular-linear") {
    net.stages.push_back(ones3x3(0.0, PaddingMode::circular(1)));
  } else {
    throw ConfigError("unknown preset '" + std::string(name) +
                      "'; available: nopad-linear, zeropad-2layer, "
                      "reflect-linear, circular-linear");
  }
  return net;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "nopad-linear", "zeropad-2layer", "reflect-linear", "circular-linear"};
  return names;
}

}  // namespace padlab

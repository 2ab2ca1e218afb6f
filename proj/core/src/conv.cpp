#include "padlab/conv.hpp"

#include <cmath>
#include <string>

namespace padlab {

namespace detail {

int resolve_axis_index(int pos, int extent, PaddingKind kind) {
  if (pos >= 0 && pos < extent) {
    return pos;
  }
  switch (kind) {
    case PaddingKind::None:
      throw DimensionError("coordinate outside an unpadded axis");
    case PaddingKind::Zero:
      return -1;
    case PaddingKind::Reflect:
      // Mirror about the border without repeating the edge sample:
      // -1 -> 1, extent -> extent-2.
      if (pos < 0) return -pos;
      return 2 * extent - 2 - pos;
    case PaddingKind::Circular:
      return ((pos % extent) + extent) % extent;
  }
  throw Error("unreachable padding kind");
}

std::vector<int> padded_axis_map(int extent, int pad, PaddingKind kind) {
  std::vector<int> map(extent + 2 * pad);
  for (int p = 0; p < static_cast<int>(map.size()); ++p) {
    map[p] = resolve_axis_index(p - pad, extent, kind);
  }
  return map;
}

void check_padding(const PaddingMode& mode, GridSize in) {
  if (mode.pad < 0) {
    throw DimensionError("padding must be non-negative");
  }
  if (mode.kind == PaddingKind::None && mode.pad != 0) {
    throw DimensionError("padding None carries no pad amount");
  }
  if (mode.kind == PaddingKind::Reflect &&
      mode.pad >= std::min(in.height, in.width)) {
    throw DimensionError("reflect pad " + std::to_string(mode.pad) +
                         " too large for input " + in.str());
  }
}

}  // namespace detail

ConvLayer ConvLayer::filled(int out_channels, int in_channels, int kh, int kw,
                            double value, double bias, PaddingMode padding) {
  ConvLayer layer;
  layer.out_channels = out_channels;
  layer.in_channels = in_channels;
  layer.kh = kh;
  layer.kw = kw;
  layer.weights.assign(
      static_cast<std::size_t>(out_channels) * in_channels * kh * kw, value);
  layer.bias.assign(out_channels, bias);
  layer.padding = padding;
  layer.validate();
  return layer;
}

void ConvLayer::validate() const {
  if (out_channels < 1 || in_channels < 1) {
    throw DimensionError("conv channel counts must be >= 1");
  }
  if (kh < 1 || kw < 1) {
    throw DimensionError("conv kernel dimensions must be >= 1");
  }
  if (weights.size() != static_cast<std::size_t>(out_channels) * in_channels *
                            kh * kw) {
    throw DimensionError("conv weight count does not match its shape");
  }
  if (bias.size() != static_cast<std::size_t>(out_channels)) {
    throw DimensionError("conv bias count does not match out channels");
  }
  for (double w : weights) {
    if (!std::isfinite(w)) throw DimensionError("conv weights must be finite");
  }
  for (double b : bias) {
    if (!std::isfinite(b)) throw DimensionError("conv biases must be finite");
  }
}

Activation Activation::leaky_relu(double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw DimensionError("LeakyReLU slope must satisfy 0 <= gamma < 1");
  }
  return {ActKind::LeakyReLU, gamma};
}

GridSize conv_output_size(GridSize in, const ConvLayer& layer) {
  detail::check_padding(layer.padding, in);
  const int pad = layer.padding.pad;
  const GridSize out{in.height + 2 * pad - layer.kh + 1,
                     in.width + 2 * pad - layer.kw + 1};
  if (out.height < 1 || out.width < 1) {
    throw DimensionError("kernel " + std::to_string(layer.kh) + "x" +
                         std::to_string(layer.kw) +
                         " larger than padded input " + in.str());
  }
  return out;
}

FeatureMap conv2d(const FeatureMap& input, const ConvLayer& layer) {
  layer.validate();
  if (input.channels() != layer.in_channels) {
    throw DimensionError("conv expects " + std::to_string(layer.in_channels) +
                         " input channels, got " +
                         std::to_string(input.channels()));
  }
  const GridSize out_size = conv_output_size(input.size(), layer);
  const int pad = layer.padding.pad;
  const auto row_map =
      detail::padded_axis_map(input.height(), pad, layer.padding.kind);
  const auto col_map =
      detail::padded_axis_map(input.width(), pad, layer.padding.kind);

  FeatureMap out(layer.out_channels, out_size, 0.0);
  const int W = input.width();
  for (int oc = 0; oc < layer.out_channels; ++oc) {
    for (int oy = 0; oy < out_size.height; ++oy) {
      for (int ox = 0; ox < out_size.width; ++ox) {
        double acc = layer.bias[oc];
        for (int ic = 0; ic < layer.in_channels; ++ic) {
          const auto plane = input.channel(ic);
          for (int ky = 0; ky < layer.kh; ++ky) {
            const int sy = row_map[oy + ky];
            if (sy < 0) continue;
            const double* row = plane.data() + std::int64_t{sy} * W;
            const double* w =
                layer.weights.data() + layer.weight_index(oc, ic, ky, 0);
            for (int kx = 0; kx < layer.kw; ++kx) {
              const int sx = col_map[ox + kx];
              if (sx < 0) continue;
              acc += w[kx] * row[sx];
            }
          }
        }
        out.at(oc, oy, ox) = acc;
      }
    }
  }
  return out;
}

FeatureMap activate(const FeatureMap& input, const Activation& act) {
  if (act.kind == ActKind::Identity) {
    return input;
  }
  FeatureMap out = input;
  for (double& v : out.values()) {
    if (v < 0.0) v *= act.gamma;
  }
  return out;
}

FeatureMap forward(const NetworkSpec& net, const FeatureMap& input) {
  FeatureMap current = input;
  for (std::size_t s = 0; s < net.stages.size(); ++s) {
    try {
      current = std::visit(
          [&](const auto& stage) -> FeatureMap {
            using T = std::decay_t<decltype(stage)>;
            if constexpr (std::is_same_v<T, ConvLayer>) {
              return conv2d(current, stage);
            } else if constexpr (std::is_same_v<T, Activation>) {
              return activate(current, stage);
            } else {
              return bilinear_resize(current, stage.target);
            }
          },
          net.stages[s]);
    } catch (const DimensionError& e) {
      throw DimensionError("stage " + std::to_string(s) + ": " + e.what());
    } catch (const UnsupportedError& e) {
      throw UnsupportedError("stage " + std::to_string(s) + ": " + e.what());
    } catch (const Error& e) {
      throw Error("stage " + std::to_string(s) + ": " + e.what());
    }
  }
  return current;
}

int required_input_channels(const NetworkSpec& net) {
  for (const Stage& stage : net.stages) {
    if (const auto* conv = std::get_if<ConvLayer>(&stage)) {
      return conv->in_channels;
    }
  }
  return 1;
}

std::pair<int, GridSize> output_shape(const NetworkSpec& net, int in_channels,
                                      GridSize in) {
  int channels = in_channels;
  GridSize size = in;
  for (std::size_t s = 0; s < net.stages.size(); ++s) {
    try {
      if (const auto* conv = std::get_if<ConvLayer>(&net.stages[s])) {
        if (conv->in_channels != channels) {
          throw DimensionError("conv expects " +
                               std::to_string(conv->in_channels) +
                               " channels, gets " + std::to_string(channels));
        }
        size = conv_output_size(size, *conv);
        channels = conv->out_channels;
      } else if (const auto* up = std::get_if<Upsample>(&net.stages[s])) {
        validate_grid(up->target);
        size = up->target;
      }
    } catch (const Error& e) {
      throw DimensionError("stage " + std::to_string(s) + ": " + e.what());
    }
  }
  return {channels, size};
}

bool is_linear(const NetworkSpec& net) {
  for (const Stage& stage : net.stages) {
    if (const auto* act = std::get_if<Activation>(&stage)) {
      if (act->kind != ActKind::Identity) return false;
    }
  }
  return true;
}

std::pair<NetworkSpec, GridSize> strip_padding(const NetworkSpec& net,
                                               GridSize final_size) {
  validate_grid(final_size);
  for (const Stage& stage : net.stages) {
    if (const auto* conv = std::get_if<ConvLayer>(&stage)) {
      if (conv->padding.kind == PaddingKind::Reflect ||
          conv->padding.kind == PaddingKind::Circular) {
        throw UnsupportedError(
            "strip_padding handles only Zero or None conv padding");
      }
    }
  }

  NetworkSpec stripped = net;
  GridSize need = final_size;
  for (std::size_t idx = net.stages.size(); idx-- > 0;) {
    Stage& stage = stripped.stages[idx];
    if (auto* conv = std::get_if<ConvLayer>(&stage)) {
      conv->padding = PaddingMode::none();
      need = GridSize{need.height + conv->kh - 1, need.width + conv->kw - 1};
    } else if (auto* up = std::get_if<Upsample>(&stage)) {
      const GridSize original = up->target;
      up->target = need;
      // Stages ahead of the upsample keep the shape profile they had when
      // the original target was in effect.
      need = original;
    }
  }
  return {std::move(stripped), need};
}

}  // namespace padlab

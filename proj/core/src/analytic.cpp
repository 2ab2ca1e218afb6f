#include "padlab/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace padlab {

namespace {

// Sorts scratch terms by id and fuses duplicates. Summation happens in id
// order, so the result does not depend on the order taps were appended.
void canonicalize(std::vector<std::pair<std::int64_t, double>>& terms) {
  std::sort(terms.begin(), terms.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t out = 0;
  for (std::size_t i = 0; i < terms.size();) {
    std::int64_t id = terms[i].first;
    double sum = 0.0;
    while (i < terms.size() && terms[i].first == id) {
      sum += terms[i].second;
      ++i;
    }
    terms[out++] = {id, sum};
  }
  terms.resize(out);
}

LinearCoeffMap identity_coeff_map(int channels, GridSize size) {
  LinearCoeffMap map;
  map.channels = channels;
  map.size = size;
  map.input_channels = channels;
  map.input_size = size;
  map.forms.resize(static_cast<std::size_t>(channels) * size.cells());
  for (std::size_t e = 0; e < map.forms.size(); ++e) {
    map.forms[e].terms = {{static_cast<std::int64_t>(e), 1.0}};
  }
  return map;
}

LinearCoeffMap apply_conv(const LinearCoeffMap& in, const ConvLayer& layer) {
  if (layer.in_channels != in.channels) {
    throw DimensionError("conv expects " + std::to_string(layer.in_channels) +
                         " channels, coefficient map has " +
                         std::to_string(in.channels));
  }
  const GridSize out_size = conv_output_size(in.size, layer);
  const int pad = layer.padding.pad;
  const auto row_map =
      detail::padded_axis_map(in.size.height, pad, layer.padding.kind);
  const auto col_map =
      detail::padded_axis_map(in.size.width, pad, layer.padding.kind);

  LinearCoeffMap out;
  out.channels = layer.out_channels;
  out.size = out_size;
  out.input_channels = in.input_channels;
  out.input_size = in.input_size;
  out.forms.resize(static_cast<std::size_t>(layer.out_channels) *
                   out_size.cells());

  std::vector<std::pair<std::int64_t, double>> scratch;
  for (int oc = 0; oc < layer.out_channels; ++oc) {
    for (int oy = 0; oy < out_size.height; ++oy) {
      for (int ox = 0; ox < out_size.width; ++ox) {
        scratch.clear();
        double constant = layer.bias[oc];
        for (int ic = 0; ic < layer.in_channels; ++ic) {
          for (int ky = 0; ky < layer.kh; ++ky) {
            const int sy = row_map[oy + ky];
            if (sy < 0) continue;
            for (int kx = 0; kx < layer.kw; ++kx) {
              const int sx = col_map[ox + kx];
              if (sx < 0) continue;
              const double w = layer.weight(oc, ic, ky, kx);
              if (w == 0.0) continue;
              const LinearForm& src = in.forms[in.index(ic, sy, sx)];
              constant += w * src.constant;
              for (const auto& [id, coeff] : src.terms) {
                scratch.emplace_back(id, w * coeff);
              }
            }
          }
        }
        canonicalize(scratch);
        LinearForm& form = out.forms[out.index(oc, oy, ox)];
        form.terms = scratch;
        form.constant = constant;
      }
    }
  }
  return out;
}

LinearCoeffMap apply_upsample(const LinearCoeffMap& in, GridSize target) {
  validate_grid(target);
  if (target == in.size) return in;

  LinearCoeffMap out;
  out.channels = in.channels;
  out.size = target;
  out.input_channels = in.input_channels;
  out.input_size = in.input_size;
  out.forms.resize(static_cast<std::size_t>(in.channels) * target.cells());

  // Interpolation weights per target coordinate, one axis at a time,
  // extracted by resizing indicator maps.
  const auto axis_weights = [](int source, int target_extent) {
    std::vector<std::vector<std::pair<int, double>>> weights(target_extent);
    for (int s = 0; s < source; ++s) {
      FeatureMap indicator(1, GridSize{source, 1}, 0.0);
      indicator.at(0, s, 0) = 1.0;
      const FeatureMap resized =
          bilinear_resize(indicator, GridSize{target_extent, 1});
      for (int t = 0; t < target_extent; ++t) {
        const double w = resized.at(0, t, 0);
        if (w != 0.0) weights[t].emplace_back(s, w);
      }
    }
    return weights;
  };
  const auto rows = axis_weights(in.size.height, target.height);
  const auto cols = axis_weights(in.size.width, target.width);

  std::vector<std::pair<std::int64_t, double>> scratch;
  for (int c = 0; c < in.channels; ++c) {
    for (int ty = 0; ty < target.height; ++ty) {
      for (int tx = 0; tx < target.width; ++tx) {
        scratch.clear();
        double constant = 0.0;
        for (const auto& [sy, wy] : rows[ty]) {
          for (const auto& [sx, wx] : cols[tx]) {
            const double w = wy * wx;
            const LinearForm& src = in.forms[in.index(c, sy, sx)];
            constant += w * src.constant;
            for (const auto& [id, coeff] : src.terms) {
              scratch.emplace_back(id, w * coeff);
            }
          }
        }
        canonicalize(scratch);
        LinearForm& form = out.forms[out.index(c, ty, tx)];
        form.terms = scratch;
        form.constant = constant;
      }
    }
  }
  return out;
}

// Sum of coefficient products over shared ids (two-pointer merge).
double shared_dot(const LinearForm& a, const LinearForm& b) {
  double sum = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.terms.size() && j < b.terms.size()) {
    if (a.terms[i].first < b.terms[j].first) {
      ++i;
    } else if (a.terms[i].first > b.terms[j].first) {
      ++j;
    } else {
      sum += a.terms[i].second * b.terms[j].second;
      ++i;
      ++j;
    }
  }
  return sum;
}

}  // namespace

LinearCoeffMap build_coeff_map(const NetworkSpec& net, int input_channels,
                               GridSize input_size) {
  validate_grid(input_size);
  if (!is_linear(net)) {
    throw UnsupportedError(
        "coefficient maps exist only for linear pipelines "
        "(Conv/Upsample/Identity stages)");
  }
  LinearCoeffMap map = identity_coeff_map(input_channels, input_size);
  for (std::size_t s = 0; s < net.stages.size(); ++s) {
    try {
      if (const auto* conv = std::get_if<ConvLayer>(&net.stages[s])) {
        map = apply_conv(map, *conv);
      } else if (const auto* up = std::get_if<Upsample>(&net.stages[s])) {
        map = apply_upsample(map, up->target);
      }
    } catch (const Error& e) {
      throw DimensionError("stage " + std::to_string(s) + ": " + e.what());
    }
  }
  return map;
}

StatReport analytic_moments(const NetworkSpec& net, GridSize input_size,
                            const OffsetSet& offsets) {
  const int in_channels = required_input_channels(net);
  const LinearCoeffMap map = build_coeff_map(net, in_channels, input_size);
  validate_offsets(offsets, map.size);

  StatReport report;
  report.channels = map.channels;
  report.size = map.size;
  report.samples = 0;
  const std::size_t entries = map.forms.size();
  report.expectation.resize(entries);
  report.variance.resize(entries);
  report.se.assign(entries, 0.0);
  for (std::size_t e = 0; e < entries; ++e) {
    report.expectation[e] = map.forms[e].constant;
    report.variance[e] = shared_dot(map.forms[e], map.forms[e]);
  }

  for (const Offset& offset : offsets) {
    OffsetStat stat;
    stat.offset = offset;
    stat.anchor_y0 = std::max(0, -offset.di);
    stat.anchor_x0 = std::max(0, -offset.dj);
    stat.rows = map.size.height - std::abs(offset.di);
    stat.cols = map.size.width - std::abs(offset.dj);
    stat.mean.resize(static_cast<std::size_t>(map.channels) * stat.rows *
                     stat.cols);
    stat.se.assign(stat.mean.size(), 0.0);
    for (int c = 0; c < map.channels; ++c) {
      for (int r = 0; r < stat.rows; ++r) {
        for (int q = 0; q < stat.cols; ++q) {
          const int ay = stat.anchor_y0 + r;
          const int ax = stat.anchor_x0 + q;
          const LinearForm& a = map.forms[map.index(c, ay, ax)];
          const LinearForm& b =
              map.forms[map.index(c, ay + offset.di, ax + offset.dj)];
          stat.mean[stat.index(c, r, q)] =
              shared_dot(a, b) + a.constant * b.constant;
        }
      }
    }
    report.offsets.push_back(std::move(stat));
  }
  return report;
}

double leaky_relu_gaussian_mean(double mu, double sigma, double gamma) {
  if (sigma < 0.0) throw DimensionError("sigma must be non-negative");
  if (sigma == 0.0) {
    return mu >= 0.0 ? mu : gamma * mu;
  }
  const double t = mu / sigma;
  const double phi =
      std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
  const double cdf_pos = 0.5 * std::erfc(-t / std::numbers::sqrt2);
  const double cdf_neg = 0.5 * std::erfc(t / std::numbers::sqrt2);
  return gamma * mu * cdf_neg + mu * cdf_pos + (1.0 - gamma) * sigma * phi;
}

FeatureMap two_layer_expectation(const ConvLayer& layer1, double gamma,
                                 const ConvLayer& layer2,
                                 GridSize input_size) {
  if (layer1.in_channels != 1 || layer1.out_channels != 1 ||
      layer2.in_channels != 1 || layer2.out_channels != 1) {
    throw UnsupportedError(
        "the closed form covers single-channel layers only; multi-channel "
        "marginals after the nonlinearity are not Gaussian — use "
        "estimate_moments");
  }
  NetworkSpec first;
  first.stages.push_back(layer1);
  const LinearCoeffMap map1 = build_coeff_map(first, 1, input_size);

  // Each layer-1 output is Gaussian: mean = accumulated bias, sigma = l2
  // norm of its tap coefficients (duplicated taps from Reflect/Circular have
  // already been fused by id).
  FeatureMap means(1, map1.size, 0.0);
  for (int y = 0; y < map1.size.height; ++y) {
    for (int x = 0; x < map1.size.width; ++x) {
      const LinearForm& form = map1.forms[map1.index(0, y, x)];
      const double sigma = std::sqrt(shared_dot(form, form));
      means.at(0, y, x) = leaky_relu_gaussian_mean(form.constant, sigma, gamma);
    }
  }

  // Layer 2 acts on the mean map like a plain padded convolution: padding
  // taps contribute zero (LeakyReLU(0) = 0 for the padded zeros).
  return conv2d(means, layer2);
}

double bias_shift_check(const NetworkSpec& net, GridSize input_size,
                        const OffsetSet& offsets, double b) {
  const int in_channels = required_input_channels(net);
  const LinearCoeffMap map = build_coeff_map(net, in_channels, input_size);
  validate_offsets(offsets, map.size);

  double max_deviation = 0.0;
  for (const Offset& offset : offsets) {
    const int y0 = std::max(0, -offset.di);
    const int x0 = std::max(0, -offset.dj);
    const int rows = map.size.height - std::abs(offset.di);
    const int cols = map.size.width - std::abs(offset.dj);
    for (int c = 0; c < map.channels; ++c) {
      for (int r = 0; r < rows; ++r) {
        for (int q = 0; q < cols; ++q) {
          const LinearForm& a = map.forms[map.index(c, y0 + r, x0 + q)];
          const LinearForm& bf = map.forms[map.index(
              c, y0 + r + offset.di, x0 + q + offset.dj)];
          const double dot = shared_dot(a, bf);
          const double r_plain = dot + a.constant * bf.constant;
          const double r_shifted =
              dot + (a.constant + b) * (bf.constant + b);
          max_deviation = std::max(
              max_deviation, std::abs((r_shifted - r_plain) - b * b));
        }
      }
    }
  }
  return max_deviation;
}

}  // namespace padlab

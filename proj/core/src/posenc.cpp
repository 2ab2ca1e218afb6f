#include "padlab/posenc.hpp"

#include <cmath>
#include <string>

#include "padlab/resize.hpp"

namespace padlab {

namespace {

double axis_coordinate(int index, int extent, CsgConvention convention) {
  if (convention == CsgConvention::AlignCorners) {
    if (extent == 1) return 0.0;
    return (2.0 * index - (extent - 1)) / (extent - 1);
  }
  // 2*(i/H - 1/2) over a common denominator: (2i - H) / H.
  return (2.0 * index - extent) / extent;
}

void check_location(GridSize size, int i, int j) {
  if (i < 0 || i >= size.height || j < 0 || j >= size.width) {
    throw DimensionError("location (" + std::to_string(i) + "," +
                         std::to_string(j) + ") outside grid " + size.str());
  }
}

}  // namespace

FeatureMap csg(GridSize size, CsgConvention convention) {
  validate_grid(size);
  FeatureMap map(2, size, 0.0);
  for (int i = 0; i < size.height; ++i) {
    const double row = axis_coordinate(i, size.height, convention);
    for (int j = 0; j < size.width; ++j) {
      map.at(0, i, j) = row;
      map.at(1, i, j) = axis_coordinate(j, size.width, convention);
    }
  }
  return map;
}

std::array<double, 2> csg_at(GridSize size, int i, int j,
                             CsgConvention convention) {
  validate_grid(size);
  check_location(size, i, j);
  return {axis_coordinate(i, size.height, convention),
          axis_coordinate(j, size.width, convention)};
}

std::array<double, 2> csg_translate(GridSize size, int i, int j, int di,
                                    int dj) {
  validate_grid(size);
  check_location(size, i, j);
  check_location(size, i + di, j + dj);
  // csg(i) + 2*di/H carried out on the integer numerator, so the sum is the
  // same float as evaluating the grid at i+di directly.
  return {(2.0 * i - size.height + 2.0 * di) / size.height,
          (2.0 * j - size.width + 2.0 * dj) / size.width};
}

std::vector<double> spe_frequencies(int total_channels) {
  if (total_channels < 4 || total_channels % 4 != 0) {
    throw DimensionError("SPE channel count must be a positive multiple of 4");
  }
  const int axis_dim = total_channels / 2;
  std::vector<double> omega(axis_dim / 2);
  for (int k = 0; k < axis_dim / 2; ++k) {
    omega[k] = std::pow(10000.0, -2.0 * k / axis_dim);
  }
  return omega;
}

FeatureMap spe(GridSize size, int channels) {
  validate_grid(size);
  const std::vector<double> omega = spe_frequencies(channels);
  const int half = channels / 2;
  FeatureMap map(channels, size, 0.0);
  for (int i = 0; i < size.height; ++i) {
    for (int j = 0; j < size.width; ++j) {
      for (std::size_t k = 0; k < omega.size(); ++k) {
        map.at(static_cast<int>(2 * k), i, j) = std::sin(omega[k] * i);
        map.at(static_cast<int>(2 * k + 1), i, j) = std::cos(omega[k] * i);
        map.at(half + static_cast<int>(2 * k), i, j) = std::sin(omega[k] * j);
        map.at(half + static_cast<int>(2 * k + 1), i, j) =
            std::cos(omega[k] * j);
      }
    }
  }
  return map;
}

std::array<double, 2> spe_rotate(const std::array<double, 2>& sin_cos, int phi,
                                 double omega) {
  const double angle = omega * phi;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * sin_cos[0] + s * sin_cos[1], -s * sin_cos[0] + c * sin_cos[1]};
}

FeatureMap fixed_constant(int channels, GridSize size, const RngSpec& rng) {
  return sample_gaussian(channels, size, rng);
}

EncodingKind EncodingKind::make_csg(CsgConvention convention) {
  EncodingKind kind;
  kind.tag = EncodingKindTag::Csg;
  kind.channels = 2;
  kind.csg_convention = convention;
  return kind;
}

EncodingKind EncodingKind::make_spe(int channels) {
  if (channels < 4 || channels % 4 != 0) {
    throw DimensionError("SPE channel count must be a positive multiple of 4");
  }
  EncodingKind kind;
  kind.tag = EncodingKindTag::Spe;
  kind.channels = channels;
  return kind;
}

EncodingKind EncodingKind::make_fixed_constant(int channels,
                                               const RngSpec& rng) {
  if (channels < 1) {
    throw DimensionError("fixed-constant channel count must be >= 1");
  }
  EncodingKind kind;
  kind.tag = EncodingKindTag::FixedConstant;
  kind.channels = channels;
  kind.rng = rng;
  return kind;
}

FeatureMap make_encoding(const EncodingKind& kind, GridSize size) {
  switch (kind.tag) {
    case EncodingKindTag::Csg:
      return csg(size, kind.csg_convention);
    case EncodingKindTag::Spe:
      return spe(size, kind.channels);
    case EncodingKindTag::FixedConstant:
      return fixed_constant(kind.channels, size, kind.rng);
  }
  throw Error("unreachable encoding kind");
}

FeatureMap resize_encoding(const EncodingKind& kind, const FeatureMap& current,
                           GridSize target, ResizeMode mode) {
  validate_grid(target);
  if (current.channels() != kind.channels) {
    throw DimensionError("encoding has " + std::to_string(current.channels()) +
                         " channels, descriptor says " +
                         std::to_string(kind.channels));
  }
  if (mode == ResizeMode::Interp) {
    return bilinear_resize(current, target);
  }
  if (kind.tag != EncodingKindTag::Spe) {
    throw UnsupportedError("Expand resizing applies to SPE only");
  }
  return spe(target, kind.channels);
}

FeatureMap compose_noise_pe(const FeatureMap& pe, const RngSpec& rng,
                            double sigma) {
  FeatureMap noise = sample_gaussian(pe.channels(), pe.size(), rng);
  FeatureMap out = pe;
  auto out_values = out.values();
  auto noise_values = noise.values();
  for (std::size_t f = 0; f < out_values.size(); ++f) {
    out_values[f] += sigma * noise_values[f];
  }
  return out;
}

}  // namespace padlab

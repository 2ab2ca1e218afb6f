#include <doctest.h>

#include <cmath>

#include "padlab/conv.hpp"
#include "padlab/net_json.hpp"
#include "padlab/presets.hpp"
#include "padlab/rng.hpp"
#include "test_oracles.hpp"

using namespace padlab;

namespace {

ConvLayer random_layer(int out_c, int in_c, int kh, int kw, PaddingMode pad,
                       std::uint64_t seed) {
  ConvLayer layer;
  layer.out_channels = out_c;
  layer.in_channels = in_c;
  layer.kh = kh;
  layer.kw = kw;
  layer.padding = pad;
  const RngSpec rng{seed, 101};
  const std::size_t n = static_cast<std::size_t>(out_c) * in_c * kh * kw;
  layer.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    layer.weights[i] = normal_at(rng, i);
  }
  layer.bias.resize(out_c);
  for (int i = 0; i < out_c; ++i) {
    layer.bias[i] = 0.25 * normal_at(rng, n + i);
  }
  return layer;
}

}  // namespace

TEST_CASE("valid conv of all-ones sums the window") {
  const FeatureMap input = make_map(1, GridSize{3, 3}, 1.0);
  const ConvLayer layer =
      ConvLayer::filled(1, 1, 3, 3, 1.0, 0.0, PaddingMode::none());
  const FeatureMap out = conv2d(input, layer);
  CHECK(out.size() == GridSize{1, 1});
  CHECK(out.at(0, 0, 0) == 9.0);
}

TEST_CASE("zero padding contributes literal zeros") {
  FeatureMap input(1, GridSize{1, 1}, 0.0);
  input.at(0, 0, 0) = -2.75;
  const ConvLayer layer =
      ConvLayer::filled(1, 1, 3, 3, 1.0, 0.0, PaddingMode::zero(1));
  const FeatureMap out = conv2d(input, layer);
  CHECK(out.size() == GridSize{1, 1});
  CHECK(out.at(0, 0, 0) == -2.75);
}

TEST_CASE("circular padding preserves a uniform map") {
  const FeatureMap input = make_map(1, GridSize{3, 3}, 1.0);
  const ConvLayer layer =
      ConvLayer::filled(1, 1, 3, 3, 1.0, 0.0, PaddingMode::circular(1));
  const FeatureMap out = conv2d(input, layer);
  CHECK(out.size() == GridSize{3, 3});
  for (double v : out.values()) CHECK(v == 9.0);
}

TEST_CASE("reflect padding mirrors without repeating the border") {
  const FeatureMap input =
      FeatureMap::from_values(1, GridSize{3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  const ConvLayer identity =
      ConvLayer::filled(1, 1, 1, 1, 1.0, 0.0, PaddingMode::reflect(1));
  const FeatureMap out = conv2d(input, identity);
  CHECK(out.size() == GridSize{5, 5});
  // Padded plane rows read source rows [1, 0, 1, 2, 1].
  CHECK(out.at(0, 0, 0) == 5.0);
  CHECK(out.at(0, 0, 1) == 4.0);
  CHECK(out.at(0, 1, 1) == 1.0);
  CHECK(out.at(0, 4, 4) == 5.0);
  CHECK(out.at(0, 4, 2) == 5.0);
  CHECK(out.at(0, 3, 0) == 8.0);
}

TEST_CASE("conv matches the padded-plane reference on random cases") {
  const std::vector<PaddingMode> modes = {
      PaddingMode::none(), PaddingMode::zero(2), PaddingMode::reflect(1),
      PaddingMode::circular(3)};
  int case_id = 0;
  for (const PaddingMode& mode : modes) {
    for (int k : {1, 2, 3}) {
      const ConvLayer layer = random_layer(2, 2, k, k, mode,
                                            static_cast<std::uint64_t>(500 + case_id));
      const FeatureMap input =
          sample_gaussian(2, GridSize{6, 5},
                          RngSpec{static_cast<std::uint64_t>(900 + case_id), 0});
      ++case_id;
      const FeatureMap ours = conv2d(input, layer);
      const FeatureMap ref = oracle::reference_conv2d(input, layer);
      REQUIRE(ours.size() == ref.size());
      for (std::size_t i = 0; i < ours.values().size(); ++i) {
        CHECK(ours.values()[i] ==
              doctest::Approx(ref.values()[i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("conv error paths") {
  const FeatureMap input = make_map(2, GridSize{3, 3}, 1.0);
  const ConvLayer wrong_channels =
      ConvLayer::filled(1, 1, 3, 3, 1.0, 0.0, PaddingMode::none());
  CHECK_THROWS_AS(conv2d(input, wrong_channels), DimensionError);

  const FeatureMap small = make_map(1, GridSize{2, 2}, 1.0);
  const ConvLayer big =
      ConvLayer::filled(1, 1, 3, 3, 1.0, 0.0, PaddingMode::none());
  CHECK_THROWS_AS(conv2d(small, big), DimensionError);

  const ConvLayer reflect_too_big =
      ConvLayer::filled(1, 1, 3, 3, 1.0, 0.0, PaddingMode::reflect(2));
  CHECK_THROWS_AS(conv2d(small, reflect_too_big), DimensionError);
}

TEST_CASE("activations") {
  FeatureMap m(1, GridSize{1, 3}, 0.0);
  m.at(0, 0, 0) = 2.0;
  m.at(0, 0, 1) = -1.0;
  m.at(0, 0, 2) = 0.0;
  const FeatureMap leaky = activate(m, Activation::leaky_relu(0.2));
  CHECK(leaky.at(0, 0, 0) == 2.0);
  CHECK(leaky.at(0, 0, 1) == doctest::Approx(-0.2));
  CHECK(leaky.at(0, 0, 2) == 0.0);

  CHECK(activate(m, Activation::identity()) == m);
  CHECK_THROWS_AS(Activation::leaky_relu(1.0), DimensionError);
  CHECK_THROWS_AS(Activation::leaky_relu(-0.1), DimensionError);
}

TEST_CASE("forward composes stages and reports the failing stage") {
  const FeatureMap input = make_map(1, GridSize{3, 3}, 1.0);

  const NetworkSpec empty;
  CHECK(forward(empty, input) == input);

  NetworkSpec single;
  single.stages.push_back(
      ConvLayer::filled(1, 1, 3, 3, 1.0, 0.0, PaddingMode::none()));
  CHECK(forward(single, input).at(0, 0, 0) == 9.0);

  NetworkSpec same_shape;
  same_shape.stages.push_back(
      ConvLayer::filled(1, 1, 3, 3, 1.0, 0.0, PaddingMode::zero(1)));
  same_shape.stages.push_back(Activation::leaky_relu(0.2));
  same_shape.stages.push_back(
      ConvLayer::filled(1, 1, 3, 3, 1.0, 0.0, PaddingMode::zero(1)));
  CHECK(forward(same_shape, input).size() == input.size());

  NetworkSpec failing;
  failing.stages.push_back(Activation::identity());
  failing.stages.push_back(
      ConvLayer::filled(1, 2, 3, 3, 1.0, 0.0, PaddingMode::none()));
  try {
    forward(failing, input);
    FAIL("expected a stage error");
  } catch (const DimensionError& e) {
    CHECK(std::string(e.what()).find("stage 1") != std::string::npos);
  }
}

TEST_CASE("valid convolution is translation-equivariant") {
  // Two overlapping windows of one scene: the valid outputs agree on the
  // overlap, exactly.
  const FeatureMap scene = sample_gaussian(1, GridSize{12, 12}, RngSpec{31, 0});
  const ConvLayer layer =
      random_layer(1, 1, 3, 3, PaddingMode::none(), 32);

  const auto crop = [&](int y0, int x0, int h, int w) {
    FeatureMap window(1, GridSize{h, w}, 0.0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        window.at(0, y, x) = scene.at(0, y0 + y, x0 + x);
      }
    }
    return window;
  };

  const FeatureMap out_a = conv2d(crop(0, 0, 9, 9), layer);
  const FeatureMap out_b = conv2d(crop(2, 3, 9, 9), layer);
  // out_b(y, x) corresponds to out_a(y + 2, x + 3).
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 4; ++x) {
      CHECK(out_b.at(0, y, x) == out_a.at(0, y + 2, x + 3));
    }
  }
}

TEST_CASE("circular conv is equivariant to cyclic shifts") {
  const FeatureMap input = sample_gaussian(1, GridSize{6, 7}, RngSpec{33, 0});
  const ConvLayer layer = random_layer(1, 1, 3, 3, PaddingMode::circular(1), 34);

  const int dy = 2;
  const int dx = 5;
  FeatureMap shifted(1, input.size(), 0.0);
  for (int y = 0; y < input.height(); ++y) {
    for (int x = 0; x < input.width(); ++x) {
      shifted.at(0, (y + dy) % input.height(), (x + dx) % input.width()) =
          input.at(0, y, x);
    }
  }
  const FeatureMap out = conv2d(input, layer);
  const FeatureMap out_shifted = conv2d(shifted, layer);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      CHECK(out_shifted.at(0, (y + dy) % out.height(),
                           (x + dx) % out.width()) == out.at(0, y, x));
    }
  }
}

TEST_CASE("identity-activation pipelines are affine") {
  NetworkSpec net;
  net.stages.push_back(random_layer(2, 1, 3, 3, PaddingMode::zero(1), 41));
  net.stages.push_back(Activation::identity());
  net.stages.push_back(random_layer(1, 2, 3, 3, PaddingMode::none(), 42));

  const GridSize in{8, 8};
  const FeatureMap u = sample_gaussian(1, in, RngSpec{43, 0});
  const FeatureMap v = sample_gaussian(1, in, RngSpec{43, 1});
  const double a = 1.75;
  const double b = -0.5;

  FeatureMap mix(1, in, 0.0);
  for (std::size_t i = 0; i < mix.values().size(); ++i) {
    mix.values()[i] = a * u.values()[i] + b * v.values()[i];
  }

  const FeatureMap fu = forward(net, u);
  const FeatureMap fv = forward(net, v);
  const FeatureMap fmix = forward(net, mix);
  const FeatureMap fzero = forward(net, FeatureMap(1, in, 0.0));

  // f(a u + b v) - f(0) == a (f(u) - f(0)) + b (f(v) - f(0)).
  for (std::size_t i = 0; i < fmix.values().size(); ++i) {
    const double lhs = fmix.values()[i] - fzero.values()[i];
    const double rhs = a * (fu.values()[i] - fzero.values()[i]) +
                       b * (fv.values()[i] - fzero.values()[i]);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("strip_padding on conv chains enlarges the input") {
  NetworkSpec one;
  one.stages.push_back(
      ConvLayer::filled(1, 1, 3, 3, 1.0, 0.0, PaddingMode::zero(1)));
  const auto [stripped_one, in_one] = strip_padding(one, GridSize{8, 8});
  CHECK(in_one == GridSize{10, 10});
  CHECK(std::get<ConvLayer>(stripped_one.stages[0]).padding ==
        PaddingMode::none());

  NetworkSpec two;
  two.stages.push_back(
      ConvLayer::filled(1, 1, 3, 3, 1.0, 0.0, PaddingMode::zero(1)));
  two.stages.push_back(
      ConvLayer::filled(1, 1, 3, 3, 1.0, 0.0, PaddingMode::zero(1)));
  const auto [stripped_two, in_two] = strip_padding(two, GridSize{8, 8});
  CHECK(in_two == GridSize{12, 12});

  const FeatureMap probe = sample_gaussian(1, in_two, RngSpec{50, 0});
  CHECK(forward(stripped_two, probe).size() == GridSize{8, 8});
}

TEST_CASE("strip_padding grows upsample targets") {
  NetworkSpec net;
  net.stages.push_back(
      ConvLayer::filled(1, 1, 3, 3, 1.0, 0.0, PaddingMode::zero(1)));
  net.stages.push_back(Upsample{GridSize{8, 8}});
  net.stages.push_back(Activation::leaky_relu(0.2));
  net.stages.push_back(
      ConvLayer::filled(1, 1, 5, 5, 1.0, 0.0, PaddingMode::zero(2)));
  const GridSize final_size{8, 8};
  const auto [stripped, in_size] = strip_padding(net, final_size);

  CHECK(std::get<Upsample>(stripped.stages[1]).target == GridSize{12, 12});
  const FeatureMap probe = sample_gaussian(1, in_size, RngSpec{51, 0});
  CHECK(forward(stripped, probe).size() == final_size);

  NetworkSpec reflect;
  reflect.stages.push_back(
      ConvLayer::filled(1, 1, 3, 3, 1.0, 0.0, PaddingMode::reflect(1)));
  CHECK_THROWS_AS(strip_padding(reflect, GridSize{8, 8}), UnsupportedError);
}

TEST_CASE("network JSON round-trips and hashes canonically") {
  NetworkSpec net;
  net.stages.push_back(random_layer(2, 1, 3, 2, PaddingMode::reflect(1), 60));
  net.stages.push_back(Activation::leaky_relu(0.2));
  net.stages.push_back(Upsample{GridSize{9, 4}});
  net.stages.push_back(random_layer(1, 2, 1, 1, PaddingMode::circular(2), 61));

  const std::string text = network_to_json(net);
  const NetworkSpec back = network_from_json(text);
  CHECK(back == net);
  CHECK(network_hash(back) == network_hash(net));

  CHECK_THROWS_AS(network_from_json("{\"format\": \"other\"}"), ConfigError);
  CHECK_THROWS_AS(network_from_json("not json"), ConfigError);
}

TEST_CASE("presets resolve and unknown names are config errors") {
  for (const std::string& name : preset_names()) {
    const NetworkSpec net = preset_network(name);
    CHECK_FALSE(net.stages.empty());
    const auto [channels, size] = output_shape(net, 1, GridSize{16, 16});
    CHECK(channels == 1);
    if (name == "nopad-linear") {
      CHECK(size == GridSize{14, 14});
    } else {
      CHECK(size == GridSize{16, 16});
    }
  }
  CHECK_THROWS_AS(preset_network("mystery"), ConfigError);
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "padlab/analytic.hpp"
#include "padlab/presets.hpp"
#include "padlab/rng.hpp"
#include "padlab/stats.hpp"
#include "padlab/verdict.hpp"
#include "test_oracles.hpp"

using namespace padlab;

namespace {

NetworkSpec single_conv(const ConvLayer& layer) {
  NetworkSpec net;
  net.stages.push_back(layer);
  return net;
}

ConvLayer random_layer(int out_c, int in_c, int kh, int kw, PaddingMode pad,
                       std::uint64_t seed, double bias_scale = 0.25) {
  ConvLayer layer;
  layer.out_channels = out_c;
  layer.in_channels = in_c;
  layer.kh = kh;
  layer.kw = kw;
  layer.padding = pad;
  const RngSpec rng{seed, 11};
  const std::size_t n = static_cast<std::size_t>(out_c) * in_c * kh * kw;
  layer.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) layer.weights[i] = normal_at(rng, i);
  layer.bias.resize(out_c);
  for (int i = 0; i < out_c; ++i) {
    layer.bias[i] = bias_scale * normal_at(rng, n + i);
  }
  return layer;
}

double max_abs_z(const std::vector<double>& estimate,
                 const std::vector<double>& exact,
                 const std::vector<double>& se) {
  double max_z = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double dev = std::abs(estimate[i] - exact[i]);
    if (dev == 0.0) continue;
    max_z = std::max(max_z, se[i] > 0 ? dev / se[i]
                                      : std::numeric_limits<double>::infinity());
  }
  return max_z;
}

}  // namespace

TEST_CASE("estimate_moments: bias-only expectation on a valid conv") {
  // E(y) = b for a linear conv on zero-mean input.
  const NetworkSpec net = single_conv(
      ConvLayer::filled(1, 1, 3, 3, 1.0, 0.5, PaddingMode::none()));
  const StatReport report = estimate_moments(
      net, GridSize{10, 10}, {Offset{0, 0}}, 20000, RngSpec{7, 0});
  CHECK(report.size == GridSize{8, 8});
  for (std::size_t i = 0; i < report.expectation.size(); ++i) {
    CHECK(std::abs(report.expectation[i] - 0.5) < 5.0 * report.se[i]);
  }
}

TEST_CASE("estimate_moments: autocorrelation against the overlap oracle") {
  const ConvLayer layer =
      ConvLayer::filled(1, 1, 3, 3, 1.0, 0.0, PaddingMode::none());
  const NetworkSpec net = single_conv(layer);
  const GridSize input{12, 12};

  // Frozen oracle values: full overlap 9, one-column offset 6, disjoint 0.
  CHECK(oracle::reference_single_conv_r(layer, input, 4, 4, 4, 4) == 9.0);
  CHECK(oracle::reference_single_conv_r(layer, input, 4, 4, 4, 5) == 6.0);
  CHECK(oracle::reference_single_conv_r(layer, input, 4, 4, 7, 4) == 0.0);

  const OffsetSet offsets = {Offset{0, 0}, Offset{0, 1}, Offset{3, 0}};
  const StatReport report =
      estimate_moments(net, input, offsets, 30000, RngSpec{21, 0});
  const std::vector<double> expected = {9.0, 6.0, 0.0};
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    const OffsetStat& stat = report.offsets[k];
    for (std::size_t i = 0; i < stat.mean.size(); ++i) {
      CHECK(std::abs(stat.mean[i] - expected[k]) < 5.0 * stat.se[i]);
    }
  }
}

TEST_CASE("estimate_moments: deterministic across runs and worker counts") {
  const NetworkSpec net = preset_network("zeropad-2layer");
  const OffsetSet offsets = {Offset{0, 0}, Offset{1, 1}};
  const RngSpec rng{3, 0};

  const StatReport a = estimate_moments(net, GridSize{8, 8}, offsets, 9000,
                                        rng, EstimateOptions{1});
  const StatReport b = estimate_moments(net, GridSize{8, 8}, offsets, 9000,
                                        rng, EstimateOptions{3});
  const StatReport c = estimate_moments(net, GridSize{8, 8}, offsets, 9000,
                                        rng, EstimateOptions{8});
  CHECK(a.expectation == b.expectation);
  CHECK(a.expectation == c.expectation);
  CHECK(a.variance == b.variance);
  CHECK(a.se == c.se);
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    CHECK(a.offsets[k].mean == b.offsets[k].mean);
    CHECK(a.offsets[k].mean == c.offsets[k].mean);
    CHECK(a.offsets[k].se == c.offsets[k].se);
  }
}

TEST_CASE("estimate_moments error paths") {
  const NetworkSpec net = preset_network("nopad-linear");
  CHECK_THROWS_AS(
      estimate_moments(net, GridSize{8, 8}, {Offset{0, 0}}, 1, RngSpec{}),
      DimensionError);
  CHECK_THROWS_AS(estimate_moments(net, GridSize{8, 8}, {}, 100, RngSpec{}),
                  DimensionError);
  // Output of 8x8 input is 6x6; offset 6 exceeds it.
  CHECK_THROWS_AS(
      estimate_moments(net, GridSize{8, 8}, {Offset{6, 0}}, 100, RngSpec{}),
      DimensionError);
}

TEST_CASE("analytic_moments equals the overlap oracle for single convs") {
  const GridSize input{9, 8};
  const std::vector<PaddingMode> modes = {
      PaddingMode::none(), PaddingMode::zero(1), PaddingMode::reflect(2),
      PaddingMode::circular(1)};
  int seed = 300;
  for (const PaddingMode& mode : modes) {
    const ConvLayer layer = random_layer(1, 1, 3, 3, mode, seed++);
    const NetworkSpec net = single_conv(layer);
    const OffsetSet offsets = {Offset{0, 0}, Offset{0, 1}, Offset{2, 2},
                               Offset{-1, 1}};
    const StatReport report = analytic_moments(net, input, offsets);

    for (const OffsetStat& stat : report.offsets) {
      for (int r = 0; r < stat.rows; ++r) {
        for (int q = 0; q < stat.cols; ++q) {
          const int ay = stat.anchor_y0 + r;
          const int ax = stat.anchor_x0 + q;
          const double expected = oracle::reference_single_conv_r(
              layer, input, ay, ax, ay + stat.offset.di, ax + stat.offset.dj);
          CHECK(stat.mean[stat.index(0, r, q)] ==
                doctest::Approx(expected).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("analytic_moments: zero-padded corner keeps 4 surviving taps") {
  const ConvLayer layer =
      ConvLayer::filled(1, 1, 3, 3, 1.0, 0.0, PaddingMode::zero(1));
  const NetworkSpec net = single_conv(layer);
  const StatReport report =
      analytic_moments(net, GridSize{8, 8}, {Offset{0, 0}});
  const OffsetStat& r0 = report.offsets[0];
  CHECK(r0.mean[r0.index(0, 0, 0)] == 4.0);          // corner
  CHECK(r0.mean[r0.index(0, 0, 3)] == 6.0);          // edge
  CHECK(r0.mean[r0.index(0, 4, 4)] == 9.0);          // interior
}

TEST_CASE("analytic_moments: circular autocorrelation ignores position") {
  const ConvLayer layer =
      ConvLayer::filled(1, 1, 3, 3, 1.0, 0.0, PaddingMode::circular(1));
  const NetworkSpec net = single_conv(layer);
  const OffsetSet offsets = {Offset{0, 0}, Offset{0, 1}, Offset{1, 2}};
  const StatReport report = analytic_moments(net, GridSize{8, 8}, offsets);
  for (const OffsetStat& stat : report.offsets) {
    const double first = stat.mean[0];
    for (double v : stat.mean) {
      CHECK(v == first);  // exact: integer-valued sums
    }
  }
}

TEST_CASE("analytic_moments matches the impulse-response route") {
  // Multi-layer, multi-channel, with an upsample stage: two independent
  // algebraic routes to E and R.
  NetworkSpec net;
  net.stages.push_back(random_layer(2, 1, 3, 3, PaddingMode::zero(1), 400));
  net.stages.push_back(Upsample{GridSize{10, 10}});
  net.stages.push_back(random_layer(1, 2, 2, 3, PaddingMode::reflect(1), 401));

  const GridSize input{7, 7};
  const OffsetSet offsets = {Offset{0, 0}, Offset{1, 0}, Offset{0, 2}};
  const StatReport report = analytic_moments(net, input, offsets);
  const oracle::ImpulseMap impulse = oracle::impulse_linear_map(net, 1, input);

  REQUIRE(report.size == impulse.out_size);
  for (std::size_t e = 0; e < report.expectation.size(); ++e) {
    CHECK(report.expectation[e] ==
          doctest::Approx(impulse.constant[e]).epsilon(1e-10));
  }
  for (const OffsetStat& stat : report.offsets) {
    for (int c = 0; c < report.channels; ++c) {
      for (int r = 0; r < stat.rows; ++r) {
        for (int q = 0; q < stat.cols; ++q) {
          const int ay = stat.anchor_y0 + r;
          const int ax = stat.anchor_x0 + q;
          const std::size_t a = static_cast<std::size_t>(
              report.index(c, ay, ax));
          const std::size_t b = static_cast<std::size_t>(report.index(
              c, ay + stat.offset.di, ax + stat.offset.dj));
          CHECK(stat.mean[stat.index(c, r, q)] ==
                doctest::Approx(oracle::impulse_r(impulse, a, b))
                    .epsilon(1e-10));
        }
      }
    }
  }
}

TEST_CASE("analytic_moments rejects nonlinear pipelines") {
  CHECK_THROWS_AS(
      analytic_moments(preset_network("zeropad-2layer"), GridSize{8, 8},
                       {Offset{0, 0}}),
      UnsupportedError);
}

TEST_CASE("Monte Carlo agrees with the analytic route within 5 SE") {
  NetworkSpec net;
  net.stages.push_back(random_layer(1, 1, 3, 3, PaddingMode::zero(1), 410));
  net.stages.push_back(random_layer(1, 1, 2, 2, PaddingMode::circular(1), 411));

  const GridSize input{9, 9};
  const OffsetSet offsets = {Offset{0, 0}, Offset{0, 1}, Offset{2, 1}};
  const StatReport mc =
      estimate_moments(net, input, offsets, 40000, RngSpec{55, 0});
  const StatReport exact = analytic_moments(net, input, offsets);

  CHECK(max_abs_z(mc.expectation, exact.expectation, mc.se) < 5.0);
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    CHECK(max_abs_z(mc.offsets[k].mean, exact.offsets[k].mean,
                    mc.offsets[k].se) < 5.0);
  }
}

TEST_CASE("leaky_relu_gaussian_mean against quadrature") {
  for (double mu : {0.0, -1.5, 0.75}) {
    for (double sigma : {0.5, 1.0, 3.0}) {
      for (double gamma : {0.0, 0.2, 0.9}) {
        CHECK(leaky_relu_gaussian_mean(mu, sigma, gamma) ==
              doctest::Approx(oracle::leaky_mean_quadrature(mu, sigma, gamma))
                  .epsilon(1e-9));
      }
    }
  }
  // Zero-mean closed form: (1 - gamma) * sigma / sqrt(2 pi).
  CHECK(leaky_relu_gaussian_mean(0.0, 3.0, 0.2) ==
        doctest::Approx(0.957461472963438427).epsilon(1e-14));
  // Degenerate sigma reduces to the activation itself.
  CHECK(leaky_relu_gaussian_mean(2.0, 0.0, 0.2) == 2.0);
  CHECK(leaky_relu_gaussian_mean(-2.0, 0.0, 0.2) == doctest::Approx(-0.4));
}

TEST_CASE("two_layer_expectation: interior and corner closed forms") {
  const ConvLayer layer =
      ConvLayer::filled(1, 1, 3, 3, 1.0, 0.0, PaddingMode::zero(1));
  const FeatureMap expectation =
      two_layer_expectation(layer, 0.2, layer, GridSize{16, 16});
  REQUIRE(expectation.size() == GridSize{16, 16});

  // Frozen from the closed form: 0.8 * 27 / sqrt(2 pi) and
  // 0.8 * (5 + 2 sqrt 6) / sqrt(2 pi).
  const double interior = 8.61715325667094584;
  const double corner = 3.15929715969507446;
  CHECK(expectation.at(0, 8, 8) == doctest::Approx(interior).epsilon(1e-12));
  CHECK(expectation.at(0, 0, 0) == doctest::Approx(corner).epsilon(1e-12));
  CHECK(expectation.at(0, 15, 15) == doctest::Approx(corner).epsilon(1e-12));

  // gamma = 1 collapses the activation to the identity: zero-mean output.
  const FeatureMap zero =
      two_layer_expectation(layer, 1.0, layer, GridSize{16, 16});
  for (double v : zero.values()) CHECK(v == 0.0);

  const ConvLayer multi =
      ConvLayer::filled(2, 1, 3, 3, 1.0, 0.0, PaddingMode::zero(1));
  CHECK_THROWS_AS(two_layer_expectation(multi, 0.2, layer, GridSize{16, 16}),
                  UnsupportedError);
}

TEST_CASE("two_layer_expectation agrees with Monte Carlo") {
  const NetworkSpec net = preset_network("zeropad-2layer");
  const FeatureMap exact = two_layer_expectation(
      std::get<ConvLayer>(net.stages[0]), kPresetLeakySlope,
      std::get<ConvLayer>(net.stages[2]), GridSize{12, 12});
  const StatReport mc = estimate_moments(net, GridSize{12, 12}, {Offset{0, 0}},
                                         50000, RngSpec{77, 0});
  REQUIRE(exact.size() == mc.size);
  double max_z = 0.0;
  for (std::size_t i = 0; i < mc.expectation.size(); ++i) {
    max_z = std::max(max_z,
                     std::abs(mc.expectation[i] - exact.values()[i]) / mc.se[i]);
  }
  CHECK(max_z < 5.0);
}

TEST_CASE("bias_shift_check: R shifts by exactly b^2") {
  const NetworkSpec net = single_conv(
      ConvLayer::filled(1, 1, 3, 3, 1.0, 0.0, PaddingMode::none()));
  const OffsetSet offsets = {Offset{0, 0}, Offset{0, 1}, Offset{3, 0}};
  CHECK(bias_shift_check(net, GridSize{10, 10}, offsets, 0.0) == 0.0);
  CHECK(bias_shift_check(net, GridSize{10, 10}, offsets, 2.0) <= 1e-12);
  CHECK(bias_shift_check(net, GridSize{10, 10}, offsets, -1.0) <= 1e-12);

  // The biased-net route: analytic R with bias b equals unbiased R plus b^2.
  ConvLayer biased = ConvLayer::filled(1, 1, 3, 3, 1.0, 2.0,
                                       PaddingMode::none());
  const StatReport with_bias =
      analytic_moments(single_conv(biased), GridSize{10, 10}, offsets);
  biased.bias[0] = 0.0;
  const StatReport without =
      analytic_moments(single_conv(biased), GridSize{10, 10}, offsets);
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    for (std::size_t i = 0; i < with_bias.offsets[k].mean.size(); ++i) {
      CHECK(with_bias.offsets[k].mean[i] ==
            doctest::Approx(without.offsets[k].mean[i] + 4.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("verdict: padding-free linear net is weakly stationary") {
  const NetworkSpec net = preset_network("nopad-linear");
  const StatReport report = estimate_moments(
      net, GridSize{16, 16}, {Offset{0, 0}, Offset{0, 1}, Offset{1, 1}},
      30000, RngSpec{101, 0});
  const StationarityVerdict verdict = stationarity_verdict(report, 5.0);
  CHECK(verdict.expectation_uniform);
  CHECK(verdict.offsets_consistent);
  CHECK(verdict.stationary());
}

TEST_CASE("verdict: LeakyReLU stages keep padding-free stationarity") {
  NetworkSpec net;
  net.stages.push_back(random_layer(1, 1, 3, 3, PaddingMode::none(), 600, 0.0));
  net.stages.push_back(Activation::leaky_relu(0.2));
  net.stages.push_back(random_layer(1, 1, 3, 3, PaddingMode::none(), 601, 0.0));
  const StatReport report = estimate_moments(
      net, GridSize{14, 14}, {Offset{0, 0}, Offset{1, 0}}, 30000,
      RngSpec{102, 0});
  const StationarityVerdict verdict = stationarity_verdict(report, 5.0);
  CHECK(verdict.stationary());
}

TEST_CASE("verdict: zero padding breaks expectation uniformity at corners") {
  const NetworkSpec net = preset_network("zeropad-2layer");
  const StatReport report = estimate_moments(net, GridSize{16, 16},
                                             {Offset{0, 0}}, 30000,
                                             RngSpec{103, 0});
  const StationarityVerdict verdict = stationarity_verdict(report, 5.0);
  CHECK_FALSE(verdict.expectation_uniform);

  // The most anomalous anchor-map cells are the four corners.
  std::vector<std::pair<double, int>> ranked;
  for (std::size_t i = 0; i < verdict.anchor_map.size(); ++i) {
    ranked.push_back({std::abs(verdict.anchor_map[i]), static_cast<int>(i)});
  }
  std::sort(ranked.rbegin(), ranked.rend());
  std::set<int> top4 = {ranked[0].second, ranked[1].second, ranked[2].second,
                        ranked[3].second};
  const int w = report.size.width;
  const int h = report.size.height;
  const std::set<int> corners = {0, w - 1, (h - 1) * w, (h - 1) * w + w - 1};
  CHECK(top4 == corners);
}

TEST_CASE("verdict: reflect keeps the expectation, breaks R near borders") {
  const NetworkSpec net = preset_network("reflect-linear");
  const GridSize input{16, 16};
  const OffsetSet offsets = {Offset{0, 1}, Offset{1, 0}};
  const StatReport report =
      estimate_moments(net, input, offsets, 30000, RngSpec{104, 0});
  const StationarityVerdict verdict = stationarity_verdict(report, 5.0);
  CHECK(verdict.expectation_uniform);
  CHECK_FALSE(verdict.offsets_consistent);
  for (const OffsetVerdict& ov : verdict.offsets) {
    if (ov.consistent) continue;
    // Worst deviation sits in the border band the reflection feeds.
    const bool near_border =
        ov.argmax_y <= 1 || ov.argmax_x <= 1 ||
        ov.argmax_y >= report.size.height - 2 ||
        ov.argmax_x >= report.size.width - 2;
    CHECK(near_border);
  }

  // The analytic route confirms: reflect leaves E untouched but not R.
  const StatReport exact = analytic_moments(net, input, offsets);
  for (double e : exact.expectation) CHECK(e == 0.0);
  const OffsetStat& r01 = exact.offsets[0];
  const double interior = r01.mean[r01.index(0, 8, 8)];
  CHECK(r01.mean[r01.index(0, 8, 0)] != interior);
}

TEST_CASE("verdict: circular padding is stationary in the cyclic sense") {
  const NetworkSpec net = preset_network("circular-linear");
  const OffsetSet offsets = {Offset{0, 0}, Offset{0, 1}, Offset{2, 2}};
  const StatReport mc = estimate_moments(net, GridSize{16, 16}, offsets,
                                         30000, RngSpec{105, 0});
  CHECK(stationarity_verdict(mc, 5.0).stationary());

  // Analytic circular R is exactly equal across positions, so the exact
  // report passes the verdict with zero deviations.
  const StatReport exact = analytic_moments(net, GridSize{16, 16}, offsets);
  const StationarityVerdict exact_verdict = stationarity_verdict(exact, 5.0);
  CHECK(exact_verdict.stationary());
  CHECK(exact_verdict.expectation_max_z == 0.0);
}

TEST_CASE("verdict requires SE maps") {
  StatReport empty;
  CHECK_THROWS_AS(stationarity_verdict(empty, 5.0), DimensionError);
}

TEST_CASE("thread count resolution: argument, env var, hardware") {
  CHECK(resolve_thread_count(5) == 5);
  setenv("PADLAB_THREADS", "3", 1);
  CHECK(resolve_thread_count(0) == 3);
  CHECK(resolve_thread_count(2) == 2);  // explicit argument wins
  unsetenv("PADLAB_THREADS");
  CHECK(resolve_thread_count(0) >= 1);
}

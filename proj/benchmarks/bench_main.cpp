#include <benchmark/benchmark.h>

#include "padlab/analytic.hpp"
#include "padlab/conv.hpp"
#include "padlab/posenc.hpp"
#include "padlab/presets.hpp"
#include "padlab/resize.hpp"
#include "padlab/rng.hpp"
#include "padlab/stats.hpp"

using namespace padlab;

namespace {

void BM_SampleGaussian(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const RngSpec rng{42, 0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_gaussian(1, GridSize{side, side}, rng));
  }
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_SampleGaussian)->Arg(16)->Arg(64)->Arg(256);

void BM_Conv2dValid(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const FeatureMap input = sample_gaussian(1, GridSize{side, side}, RngSpec{1, 0});
  const ConvLayer layer =
      ConvLayer::filled(1, 1, 3, 3, 0.5, 0.0, PaddingMode::none());
  for (auto _ : state) {
    benchmark::DoNotOptimize(conv2d(input, layer));
  }
}
BENCHMARK(BM_Conv2dValid)->Arg(16)->Arg(64)->Arg(128);

void BM_Conv2dCircular(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const FeatureMap input = sample_gaussian(1, GridSize{side, side}, RngSpec{2, 0});
  const ConvLayer layer =
      ConvLayer::filled(1, 1, 3, 3, 0.5, 0.0, PaddingMode::circular(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(conv2d(input, layer));
  }
}
BENCHMARK(BM_Conv2dCircular)->Arg(16)->Arg(64);

void BM_BilinearResize(benchmark::State& state) {
  const FeatureMap input = sample_gaussian(2, GridSize{32, 32}, RngSpec{3, 0});
  const GridSize target{static_cast<int>(state.range(0)),
                        static_cast<int>(state.range(0))};
  for (auto _ : state) {
    benchmark::DoNotOptimize(bilinear_resize(input, target));
  }
}
BENCHMARK(BM_BilinearResize)->Arg(64)->Arg(256);

void BM_EstimateMoments(benchmark::State& state) {
  const NetworkSpec net = preset_network("zeropad-2layer");
  const OffsetSet offsets = {Offset{0, 0}, Offset{0, 1}};
  const std::uint64_t samples = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_moments(net, GridSize{16, 16}, offsets,
                                              samples, RngSpec{4, 0},
                                              EstimateOptions{1}));
  }
  state.SetItemsProcessed(state.iterations() * samples);
}
BENCHMARK(BM_EstimateMoments)->Arg(2048)->Arg(16384)->Unit(benchmark::kMillisecond);

void BM_AnalyticMoments(benchmark::State& state) {
  const NetworkSpec net = preset_network("circular-linear");
  const OffsetSet offsets = {Offset{0, 0}, Offset{0, 1}, Offset{2, 2}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        analytic_moments(net, GridSize{16, 16}, offsets));
  }
}
BENCHMARK(BM_AnalyticMoments)->Unit(benchmark::kMicrosecond);

void BM_SpeEncoding(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(spe(GridSize{side, side}, 16));
  }
}
BENCHMARK(BM_SpeEncoding)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();

#include "padlab/stats.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

namespace padlab {

namespace {

// Chunk granularity of the deterministic reduction. Fixed: changing it would
// change the merge tree and therefore the rounding of the results.
constexpr std::uint64_t kChunkSamples = 4096;

struct WelfordArray {
  std::uint64_t count = 0;
  std::vector<double> mean;
  std::vector<double> m2;

  explicit WelfordArray(std::size_t n = 0) : mean(n, 0.0), m2(n, 0.0) {}

  // One update step with 1/count precomputed by the caller (count is the
  // same for every entry of a sample).
  void update(std::size_t i, double value, double inv_count) {
    const double delta = value - mean[i];
    mean[i] += delta * inv_count;
    m2[i] += delta * (value - mean[i]);
  }

  // Chan's pairwise merge; commutative up to rounding, applied in fixed order.
  void merge(const WelfordArray& other) {
    if (other.count == 0) return;
    if (count == 0) {
      *this = other;
      return;
    }
    const double na = static_cast<double>(count);
    const double nb = static_cast<double>(other.count);
    const double n = na + nb;
    for (std::size_t i = 0; i < mean.size(); ++i) {
      const double delta = other.mean[i] - mean[i];
      mean[i] += delta * (nb / n);
      m2[i] += other.m2[i] + delta * delta * (na * nb / n);
    }
    count += other.count;
  }
};

struct ChunkAccumulator {
  WelfordArray values;                    // expectation entries
  std::vector<WelfordArray> products;     // one per offset

  void merge(const ChunkAccumulator& other) {
    values.merge(other.values);
    for (std::size_t k = 0; k < products.size(); ++k) {
      products[k].merge(other.products[k]);
    }
  }
};

struct OffsetWindow {
  Offset offset;
  int y0 = 0;
  int x0 = 0;
  int rows = 0;
  int cols = 0;
};

OffsetWindow offset_window(const Offset& offset, GridSize output) {
  OffsetWindow w;
  w.offset = offset;
  w.y0 = std::max(0, -offset.di);
  w.x0 = std::max(0, -offset.dj);
  w.rows = output.height - std::abs(offset.di);
  w.cols = output.width - std::abs(offset.dj);
  return w;
}

}  // namespace

void validate_offsets(const OffsetSet& offsets, GridSize output) {
  if (offsets.empty()) {
    throw DimensionError("offset set must be non-empty");
  }
  for (const Offset& offset : offsets) {
    if (std::abs(offset.di) >= output.height ||
        std::abs(offset.dj) >= output.width) {
      throw DimensionError("offset (" + std::to_string(offset.di) + "," +
                           std::to_string(offset.dj) +
                           ") exceeds output extent " + output.str());
    }
  }
}

int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PADLAB_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

void accumulate_chunk(const NetworkSpec& net, int in_channels,
                      GridSize input_size, const std::vector<OffsetWindow>& windows,
                      GridSize out_size, int out_channels, const RngSpec& rng,
                      std::uint64_t first_sample, std::uint64_t last_sample,
                      ChunkAccumulator& acc) {
  const std::int64_t entries =
      std::int64_t{out_channels} * out_size.cells();
  acc.values = WelfordArray(static_cast<std::size_t>(entries));
  acc.products.clear();
  for (const OffsetWindow& w : windows) {
    acc.products.emplace_back(static_cast<std::size_t>(out_channels) *
                              w.rows * w.cols);
  }

  const int out_w = out_size.width;
  for (std::uint64_t s = first_sample; s < last_sample; ++s) {
    const FeatureMap input = sample_gaussian(
        in_channels, input_size, RngSpec{rng.seed, rng.stream + s});
    const FeatureMap y = forward(net, input);

    acc.values.count += 1;
    const double inv_n = 1.0 / static_cast<double>(acc.values.count);
    const auto flat = y.values();
    for (std::size_t i = 0; i < flat.size(); ++i) {
      acc.values.update(i, flat[i], inv_n);
    }

    for (std::size_t k = 0; k < windows.size(); ++k) {
      const OffsetWindow& w = windows[k];
      WelfordArray& pw = acc.products[k];
      pw.count += 1;
      const double inv_p = 1.0 / static_cast<double>(pw.count);
      std::size_t slot = 0;
      for (int c = 0; c < out_channels; ++c) {
        const auto plane = y.channel(c);
        for (int r = 0; r < w.rows; ++r) {
          const double* a = plane.data() + std::int64_t{w.y0 + r} * out_w + w.x0;
          const double* b = a + std::int64_t{w.offset.di} * out_w + w.offset.dj;
          for (int q = 0; q < w.cols; ++q, ++slot) {
            pw.update(slot, a[q] * b[q], inv_p);
          }
        }
      }
    }
  }
}

}  // namespace

StatReport estimate_moments(const NetworkSpec& net, GridSize input_size,
                            const OffsetSet& offsets, std::uint64_t samples,
                            const RngSpec& rng,
                            const EstimateOptions& options) {
  if (offsets.empty()) {
    throw DimensionError("offset set must be non-empty");
  }
  return detail::estimate_moments_impl(net, input_size, offsets, samples, rng,
                                       options);
}

StatReport detail::estimate_moments_impl(const NetworkSpec& net,
                                         GridSize input_size,
                                         const OffsetSet& offsets,
                                         std::uint64_t samples,
                                         const RngSpec& rng,
                                         const EstimateOptions& options) {
  validate_grid(input_size);
  if (samples < 2) {
    throw DimensionError("sample count must be >= 2");
  }
  const int in_channels = required_input_channels(net);
  const auto [out_channels, out_size] =
      output_shape(net, in_channels, input_size);
  if (!offsets.empty()) {
    validate_offsets(offsets, out_size);
  }

  std::vector<OffsetWindow> windows;
  windows.reserve(offsets.size());
  for (const Offset& offset : offsets) {
    windows.push_back(offset_window(offset, out_size));
  }

  const std::uint64_t chunk_count =
      (samples + kChunkSamples - 1) / kChunkSamples;
  std::vector<ChunkAccumulator> chunks(chunk_count);

  const int threads = std::min<std::int64_t>(
      resolve_thread_count(options.threads), chunk_count);
  std::atomic<std::uint64_t> next_chunk{0};
  auto worker = [&]() {
    while (true) {
      const std::uint64_t chunk = next_chunk.fetch_add(1);
      if (chunk >= chunk_count) break;
      const std::uint64_t first = chunk * kChunkSamples;
      const std::uint64_t last = std::min(samples, first + kChunkSamples);
      accumulate_chunk(net, in_channels, input_size, windows, out_size,
                       out_channels, rng, first, last, chunks[chunk]);
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  // Fixed-shape pairwise tree over chunk index. The merge order depends only
  // on the chunk count, never on scheduling.
  std::size_t active = chunks.size();
  while (active > 1) {
    std::size_t out = 0;
    for (std::size_t i = 0; i + 1 < active; i += 2) {
      chunks[i].merge(chunks[i + 1]);
      if (out != i) chunks[out] = std::move(chunks[i]);
      ++out;
    }
    if (active % 2 == 1) {
      chunks[out] = std::move(chunks[active - 1]);
      ++out;
    }
    active = out;
  }
  const ChunkAccumulator& total = chunks[0];

  StatReport report;
  report.channels = out_channels;
  report.size = out_size;
  report.samples = samples;
  report.rng = rng;
  const double m = static_cast<double>(samples);
  const std::size_t entries = total.values.mean.size();
  report.expectation = total.values.mean;
  report.variance.resize(entries);
  report.se.resize(entries);
  for (std::size_t i = 0; i < entries; ++i) {
    const double var = total.values.m2[i] / (m - 1.0);
    report.variance[i] = var;
    report.se[i] = std::sqrt(var / m);
  }
  for (std::size_t k = 0; k < windows.size(); ++k) {
    const OffsetWindow& w = windows[k];
    OffsetStat stat;
    stat.offset = w.offset;
    stat.anchor_y0 = w.y0;
    stat.anchor_x0 = w.x0;
    stat.rows = w.rows;
    stat.cols = w.cols;
    stat.mean = total.products[k].mean;
    stat.se.resize(stat.mean.size());
    for (std::size_t i = 0; i < stat.mean.size(); ++i) {
      stat.se[i] = std::sqrt(total.products[k].m2[i] / (m - 1.0) / m);
    }
    report.offsets.push_back(std::move(stat));
  }
  return report;
}

}  // namespace padlab

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "padlab/conv.hpp"
#include "padlab/stats.hpp"

namespace padlab {

// Per-location distributional statistics of a pipeline output: the mean and
// sample standard deviation of every channel across Monte Carlo samples.
// Shares the sample stream of estimate_moments for equal rng.
struct LocationStats {
  int channels = 0;
  GridSize size;
  std::vector<double> mean;    // [C][H][W]
  std::vector<double> stddev;  // [C][H][W]
  std::uint64_t samples = 0;
  RngSpec rng;

  std::int64_t index(int c, int y, int x) const {
    return (std::int64_t{c} * size.height + y) * size.width + x;
  }
  // Feature vector at one location: [mean_0.., mean_C-1, std_0.., std_C-1].
  std::vector<double> feature_vector(int y, int x) const;
};

LocationStats location_statistics(const NetworkSpec& net, GridSize input_size,
                                  std::uint64_t samples, const RngSpec& rng,
                                  const EstimateOptions& options = {});

enum class SplitRole : unsigned char { Train, Test, Excluded };

// Deterministic partition of grid locations into ridge train/test sets.
struct ProbeSplit {
  GridSize size;
  std::vector<SplitRole> roles;  // [H][W]
  std::string name;

  // (y + x) even -> Train, odd -> Test.
  static ProbeSplit checkerboard(GridSize size);
  // Checkerboard restricted to `included` locations; the rest are excluded
  // from both fitting and scoring.
  static ProbeSplit checkerboard_within(GridSize size,
                                        const std::vector<bool>& included);

  SplitRole role(int y, int x) const {
    return roles[static_cast<std::size_t>(y) * size.width + x];
  }
};

// Ridge readout from per-location statistics to grid coordinates.
struct ProbeResult {
  // Per target (normalized i, then j): intercept followed by one coefficient
  // per feature.
  std::array<std::vector<double>, 2> coefficients;
  std::array<double, 2> r2{};       // held-out R-squared per coordinate
  std::vector<double> error_map;    // [H][W]; squared error over both targets
  double lambda = 0.0;
  GridSize grid;
  std::string split;

  std::array<double, 2> train_sse{};  // residual sums over the train set
};

// Closed-form ridge fit (normal equations, intercept unpenalized) from
// feature vectors to the normalized Cartesian coordinates of each location.
// R-squared is evaluated on the held-out partition; the error map covers
// every non-excluded location. Throws DegenerateDesignError when lambda = 0
// meets a singular system.
ProbeResult fit_probe(const LocationStats& stats, GridSize grid, double lambda,
                      const ProbeSplit& split);

// Mean of the two coordinates' held-out R-squared.
double positional_info_score(const ProbeResult& result);

}  // namespace padlab

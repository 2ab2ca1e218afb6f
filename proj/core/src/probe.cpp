#include "padlab/probe.hpp"

#include <cmath>

#include "padlab/posenc.hpp"

namespace padlab {

std::vector<double> LocationStats::feature_vector(int y, int x) const {
  std::vector<double> features(2 * static_cast<std::size_t>(channels));
  for (int c = 0; c < channels; ++c) {
    features[c] = mean[index(c, y, x)];
    features[channels + c] = stddev[index(c, y, x)];
  }
  return features;
}

LocationStats location_statistics(const NetworkSpec& net, GridSize input_size,
                                  std::uint64_t samples, const RngSpec& rng,
                                  const EstimateOptions& options) {
  const StatReport report =
      detail::estimate_moments_impl(net, input_size, {}, samples, rng, options);
  LocationStats stats;
  stats.channels = report.channels;
  stats.size = report.size;
  stats.samples = samples;
  stats.rng = rng;
  stats.mean = report.expectation;
  stats.stddev.resize(report.variance.size());
  for (std::size_t i = 0; i < report.variance.size(); ++i) {
    stats.stddev[i] = std::sqrt(report.variance[i]);
  }
  return stats;
}

ProbeSplit ProbeSplit::checkerboard(GridSize size) {
  validate_grid(size);
  ProbeSplit split;
  split.size = size;
  split.name = "checkerboard";
  split.roles.resize(size.cells());
  for (int y = 0; y < size.height; ++y) {
    for (int x = 0; x < size.width; ++x) {
      split.roles[static_cast<std::size_t>(y) * size.width + x] =
          ((y + x) % 2 == 0) ? SplitRole::Train : SplitRole::Test;
    }
  }
  return split;
}

ProbeSplit ProbeSplit::checkerboard_within(GridSize size,
                                           const std::vector<bool>& included) {
  ProbeSplit split = checkerboard(size);
  if (included.size() != split.roles.size()) {
    throw DimensionError("inclusion mask size does not match the grid");
  }
  split.name = "checkerboard-within-mask";
  for (std::size_t i = 0; i < included.size(); ++i) {
    if (!included[i]) split.roles[i] = SplitRole::Excluded;
  }
  return split;
}

namespace {

// Solves A x = b by Gaussian elimination with partial pivoting. A is
// modified in place. Reports singularity through the return value.
bool solve_linear(std::vector<double>& a, int n, std::vector<double>& b) {
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  const double tiny = scale * 1e-12;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = std::abs(a[static_cast<std::size_t>(col) * n + col]);
    for (int row = col + 1; row < n; ++row) {
      const double v = std::abs(a[static_cast<std::size_t>(row) * n + col]);
      if (v > best) {
        best = v;
        pivot = row;
      }
    }
    if (!(best > tiny)) {
      return false;
    }
    if (pivot != col) {
      for (int k = 0; k < n; ++k) {
        std::swap(a[static_cast<std::size_t>(col) * n + k],
                  a[static_cast<std::size_t>(pivot) * n + k]);
      }
      std::swap(b[col], b[pivot]);
    }
    const double inv = 1.0 / a[static_cast<std::size_t>(col) * n + col];
    for (int row = col + 1; row < n; ++row) {
      const double f = a[static_cast<std::size_t>(row) * n + col] * inv;
      if (f == 0.0) continue;
      for (int k = col; k < n; ++k) {
        a[static_cast<std::size_t>(row) * n + k] -=
            f * a[static_cast<std::size_t>(col) * n + k];
      }
      b[row] -= f * b[col];
    }
  }
  for (int col = n - 1; col >= 0; --col) {
    double sum = b[col];
    for (int k = col + 1; k < n; ++k) {
      sum -= a[static_cast<std::size_t>(col) * n + k] * b[k];
    }
    b[col] = sum / a[static_cast<std::size_t>(col) * n + col];
  }
  return true;
}

}  // namespace

ProbeResult fit_probe(const LocationStats& stats, GridSize grid, double lambda,
                      const ProbeSplit& split) {
  if (!(grid == stats.size)) {
    throw DimensionError("probe grid " + grid.str() +
                         " does not match statistics grid " +
                         stats.size.str());
  }
  if (!(split.size == grid)) {
    throw DimensionError("split size does not match the grid");
  }
  if (lambda < 0.0) {
    throw DimensionError("ridge strength must be >= 0");
  }

  const int feature_dim = 2 * stats.channels;
  const int n = feature_dim + 1;  // intercept first

  std::vector<std::vector<double>> rows;   // design rows, train only
  std::vector<std::array<double, 2>> ys;   // targets, train only
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      if (split.role(y, x) != SplitRole::Train) continue;
      std::vector<double> row(n, 1.0);
      const auto f = stats.feature_vector(y, x);
      std::copy(f.begin(), f.end(), row.begin() + 1);
      rows.push_back(std::move(row));
      ys.push_back(csg_at(grid, y, x));
    }
  }
  if (rows.size() < 4) {
    throw DimensionError("probe needs at least 4 training locations, got " +
                         std::to_string(rows.size()));
  }

  // Normal equations with the intercept unpenalized.
  std::vector<double> gram(static_cast<std::size_t>(n) * n, 0.0);
  for (const auto& row : rows) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        gram[static_cast<std::size_t>(i) * n + j] += row[i] * row[j];
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      gram[static_cast<std::size_t>(i) * n + j] =
          gram[static_cast<std::size_t>(j) * n + i];
    }
  }
  for (int i = 1; i < n; ++i) {
    gram[static_cast<std::size_t>(i) * n + i] += lambda;
  }

  ProbeResult result;
  result.lambda = lambda;
  result.grid = grid;
  result.split = split.name;

  for (int target = 0; target < 2; ++target) {
    std::vector<double> rhs(n, 0.0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (int i = 0; i < n; ++i) {
        rhs[i] += rows[r][i] * ys[r][target];
      }
    }
    std::vector<double> a = gram;
    if (!solve_linear(a, n, rhs)) {
      throw DegenerateDesignError(
          "singular ridge system: the statistics do not span the design; "
          "use lambda > 0");
    }
    result.coefficients[target] = rhs;
  }

  const auto predict = [&](int y, int x, int target) {
    const auto f = stats.feature_vector(y, x);
    double value = result.coefficients[target][0];
    for (int i = 0; i < feature_dim; ++i) {
      value += result.coefficients[target][i + 1] * f[i];
    }
    return value;
  };

  result.error_map.assign(grid.cells(), 0.0);
  std::array<double, 2> test_sum{};
  std::array<std::int64_t, 2> test_count{};
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      if (split.role(y, x) != SplitRole::Test) continue;
      const auto target = csg_at(grid, y, x);
      for (int t = 0; t < 2; ++t) {
        test_sum[t] += target[t];
        test_count[t] += 1;
      }
    }
  }

  std::array<double, 2> ss_res{};
  std::array<double, 2> ss_tot{};
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      const SplitRole role = split.role(y, x);
      if (role == SplitRole::Excluded) continue;
      const auto target = csg_at(grid, y, x);
      double err = 0.0;
      for (int t = 0; t < 2; ++t) {
        const double pred = predict(y, x, t);
        const double residual = pred - target[t];
        err += residual * residual;
        if (role == SplitRole::Test) {
          ss_res[t] += residual * residual;
          const double centered =
              target[t] - test_sum[t] / static_cast<double>(test_count[t]);
          ss_tot[t] += centered * centered;
        } else {
          result.train_sse[t] += residual * residual;
        }
      }
      result.error_map[static_cast<std::size_t>(y) * grid.width + x] = err;
    }
  }
  for (int t = 0; t < 2; ++t) {
    result.r2[t] = ss_tot[t] == 0.0 ? 0.0 : 1.0 - ss_res[t] / ss_tot[t];
  }
  return result;
}

double positional_info_score(const ProbeResult& result) {
  return 0.5 * (result.r2[0] + result.r2[1]);
}

}  // namespace padlab

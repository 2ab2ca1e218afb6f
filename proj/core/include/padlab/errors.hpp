#pragma once

#include <stdexcept>
#include <string>

namespace padlab {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid shapes: zero-sized grids, channel mismatches, kernels larger than
// the padded input, offsets exceeding the output extent.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Operation not defined for the given configuration, e.g. Expand resizing of
// a Cartesian grid, or analytic moments of a nonlinear pipeline.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Bad user-facing configuration: unknown preset names, malformed files and
// schedules, invalid CLI parameter combinations.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Singular ridge system; raised when fit_probe is called with lambda = 0 on a
// rank-deficient design.
class DegenerateDesignError : public Error {
 public:
  using Error::Error;
};

}  // namespace padlab

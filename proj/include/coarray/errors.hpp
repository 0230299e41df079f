#pragma once

#include <stdexcept>

namespace coarray {

/// Invalid experiment configuration or command-line input.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A quantity is undefined for the given inputs (singular covariance,
/// rank-deficient Jacobian, CRB undefined at every requested point).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace coarray

#pragma once

#include <stdexcept>
#include <string>

namespace ldr {

// Invalid argument to a library operation (bad shapes, non-positive rates, ...).
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Malformed input data; carries row/column context where available.
struct IngestionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure (factorization breakdown, root-finder stall, NaN objective).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Series or iteration cap exceeded before reaching the requested tolerance.
struct ConvergenceError : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace ldr

#pragma once

#include <stdexcept>

namespace ipromp {

// Invalid arguments or malformed input data (CLI exit code 2).
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Numerically unusable computation: singular systems, broken covariances,
// infeasible geometry, simulator jams (CLI exit code 3).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File IO and parse failures (CLI exit code 4).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ipromp

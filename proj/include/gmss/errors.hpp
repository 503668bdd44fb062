#pragma once

#include <stdexcept>
#include <string>

namespace gmss {

// Error taxonomy. The CLI maps ConfigError (and argument parse failures) to
// exit code 2, every other Error to exit code 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape-incompatible operands.
struct DimensionError : Error {
  using Error::Error;
};

// Non-finite values, non-convergence, degenerate norms.
struct NumericError : Error {
  using Error::Error;
};

// Violated API precondition.
struct ContractError : Error {
  using Error::Error;
};

// Malformed binary container or checkpoint.
struct FormatError : Error {
  using Error::Error;
};

// Bad config / montage / partition file.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace gmss

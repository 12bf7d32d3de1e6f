#pragma once

#include <stdexcept>
#include <string>

namespace edc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dimension mismatches and illegal operator compositions.
struct DimensionError : Error {
  using Error::Error;
};

// Malformed files or config values.
struct ParseError : Error {
  using Error::Error;
};

// Integration failures, non-convergent fits, degenerate channels.
struct NumericError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace edc

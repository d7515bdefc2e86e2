#pragma once

#include <stdexcept>
#include <string>

namespace xmodal {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not agree (vector dimensions, parameter layouts).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Numerically degenerate input, e.g. a zero-norm vector fed to a
// direction-based operation. Raised instead of silently producing NaN.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent file contents (datasets, checkpoints, configs).
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid or mutually inconsistent configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace xmodal

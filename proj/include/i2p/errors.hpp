#pragma once

#include <stdexcept>
#include <string>

namespace i2p {

/// Bad configuration: unknown key, out-of-range value, architecture mismatch.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller handed an operation malformed data (shape mismatch, too few samples).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dataset or file problems (missing directory, undecodable image).
class DataError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// Non-finite loss or divergence during optimisation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace i2p

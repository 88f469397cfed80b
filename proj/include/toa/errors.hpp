#pragma once

#include <stdexcept>
#include <string>

namespace toa {

// Invalid physical input (non-positive mass, k <= 0, non-finite values, ...).
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical guard tripped: degenerate matching denominator, norm growth in
// the propagator, excessive truncation of the k_x > 0 domain.
class NumericalGuardError : public std::runtime_error {
 public:
  explicit NumericalGuardError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or unknown configuration input.
class ConfigError : public ParameterError {
 public:
  explicit ConfigError(const std::string& what) : ParameterError(what) {}
};

// Reading or writing an artifact file failed.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace toa

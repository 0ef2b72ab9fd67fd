#pragma once

#include <stdexcept>
#include <string>

namespace ppctl {

/// Bad argument values (non-finite inputs, violated preconditions).
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Overflow / NaN produced while integrating or optimizing.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent configuration (files, schedules, run setup).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ppctl

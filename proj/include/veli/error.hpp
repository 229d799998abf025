#pragma once

#include <stdexcept>
#include <string>

namespace veli {

/// Invalid configuration or arguments. The CLI maps it to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or insufficient input data (exit code 2).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape mismatch between a vector and the component consuming it.
class DimensionError : public ConfigError {
 public:
  DimensionError(const std::string& what, std::size_t expected, std::size_t actual)
      : ConfigError(what + ": expected dimension " + std::to_string(expected) + ", got " +
                    std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

/// Non-finite loss, gradient or state during optimization (exit code 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace veli

#pragma once

#include <stdexcept>
#include <string>

namespace mha {

// Bad configuration: unknown names, malformed sets, invalid process specs.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A loss function produced a non-finite value or gradient.
class LossError : public std::runtime_error {
 public:
  explicit LossError(const std::string& what) : std::runtime_error(what) {}
};

// An observation fell outside the observation cube.
class RangeError : public std::runtime_error {
 public:
  explicit RangeError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical routine failed its own consistency checks.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mha

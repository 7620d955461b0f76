#ifndef DRIFTGEN_ERRORS_HPP_
#define DRIFTGEN_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace driftgen {

// Bad user input: config files, CLI arguments, malformed CSV.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Shape or length mismatch between tensors/operands.
class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values or diverging optimization.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// File read/write failures, bad magic bytes, truncated streams.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace driftgen

#endif  // DRIFTGEN_ERRORS_HPP_

#pragma once

#include <stdexcept>
#include <string>

namespace rkan {

// Base class for all library failures.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operand shapes do not conform (reports the op name and both shapes).
struct ShapeError : Error {
  using Error::Error;
};

// Domain violations: invalid constants, near-zero denominators, bad enum
// values, out-of-range arguments.
struct ValueError : Error {
  using Error::Error;
};

// Config file problems. `line` is 1-based; 0 means the file as a whole.
struct ConfigError : Error {
  int line;
  ConfigError(const std::string& msg, int line_)
      : Error(line_ > 0 ? "line " + std::to_string(line_) + ": " + msg : msg),
        line(line_) {}
};

}  // namespace rkan

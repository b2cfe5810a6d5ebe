#pragma once

#include <stdexcept>
#include <string>

namespace covrec {

// Error taxonomy mirrored by the CLI exit codes:
// config 1, invariant 2, numeric 3.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct InvariantError : std::runtime_error {
  explicit InvariantError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace covrec

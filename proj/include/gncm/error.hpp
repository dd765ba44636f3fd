#pragma once

#include <stdexcept>
#include <string>

namespace gncm {

/// Input violates a documented precondition (bad shape, out-of-domain value).
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Missing or malformed configuration.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Non-finite energy, degenerate variances, runaway reflections.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// File could not be read, written or parsed.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace gncm

#pragma once

#include <stdexcept>
#include <string>

namespace flowpatch {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid argument or violated precondition.
class DomainError : public Error {
public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Malformed or inconsistent input data (files, CSV rows, calendars).
class DataError : public Error {
public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

// Bad run configuration.
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Numerical failure (zero-probability observation, degenerate regression).
class NumericError : public Error {
public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

}  // namespace flowpatch

#pragma once

#include <stdexcept>
#include <string>

namespace kgicu {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Tensor shapes do not conform for the requested operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// An API precondition was violated (empty input, non-scalar loss, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Operation is invalid in the current state (e.g. backward on a spent tape).
class StateError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value or option combination.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or invalid input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// A metric or task cannot be evaluated on the given inputs.
class EvalError : public Error {
 public:
  using Error::Error;
};

}  // namespace kgicu

#pragma once

#include <stdexcept>
#include <string>

namespace citepred {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A record or input file violates the data contract.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or unsupported configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Matrix/vector dimensions or column layouts do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed (rank deficiency, divergence, non-finite risk).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace citepred

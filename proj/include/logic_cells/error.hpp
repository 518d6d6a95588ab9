#pragma once

#include <stdexcept>
#include <string>

namespace logic_cells {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched vector or matrix dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Precondition on an argument value violated (outside shape checks).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid or internally inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// NaN / inf encountered during training or evaluation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A computation that legitimately produced nothing (e.g. no conclusive triples).
class EmptyResultError : public Error {
 public:
  using Error::Error;
};

}  // namespace logic_cells

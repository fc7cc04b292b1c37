#pragma once

#include <stdexcept>
#include <string>

namespace qcflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes or lengths do not fit together.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// A value violates a documented invariant (trace, symmetry, orthonormality, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The input is rank deficient or otherwise degenerate.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// A computation produced NaN/Inf.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Requested a problem size the algorithms do not support (e.g. a prime dimension).
class UnsupportedDimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace qcflow

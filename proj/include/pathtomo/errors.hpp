#pragma once

#include <stdexcept>
#include <string>

namespace pathtomo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape or subsystem layout mismatch.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A value violates a documented invariant (range, normalization, Hermiticity).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Least-squares fit could not be performed (degenerate phase grid, too few points).
class FitError : public Error {
 public:
  using Error::Error;
};

/// Measured visibility exceeds what the calibrated transmission allows,
/// or the two fringes are mutually inconsistent.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

}  // namespace pathtomo

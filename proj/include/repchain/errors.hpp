#pragma once

#include <stdexcept>
#include <string>

namespace repchain {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the documented domain (p not in (0,1], negative cut-off, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Base class for numeric failures; the CLI maps these to exit code 3.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A closed-form denominator came within 1e-9 of zero (q^a close to a power of lambda).
class NearSingularParameters : public NumericError {
 public:
  using NumericError::NumericError;
};

class SeriesDivergence : public NumericError {
 public:
  using NumericError::NumericError;
};

class RootNotBracketed : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Enumeration or table sizes beyond the configured caps.
class ResourceLimit : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Inverse Fourier transform of a lambda-vector is not a probability distribution.
class NotAChannel : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace repchain

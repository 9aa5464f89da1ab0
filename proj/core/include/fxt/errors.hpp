#pragma once

#include <stdexcept>
#include <string>

namespace fxt {

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A pivot fell below the relative threshold during LU factorization.
class SingularMatrix : public Error {
 public:
  using Error::Error;
};

/// A Hessian (objective or saddle) could not be inverted at the current state.
class SingularHessian : public SingularMatrix {
 public:
  using SingularMatrix::SingularMatrix;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

/// An operation needs the optimal value f* but the problem does not carry it.
class MissingOptimum : public Error {
 public:
  using Error::Error;
};

class InsufficientRecords : public Error {
 public:
  using Error::Error;
};

/// Bad experiment configuration: unknown names, incompatible pairings, bad
/// parameters. Raised before any integration starts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace fxt

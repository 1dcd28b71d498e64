#pragma once

#include <stdexcept>
#include <string>

namespace nsbox {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: shapes, normalization, ranges, parse failures.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A bipartite box whose marginals depend on the remote input.
class SignallingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Conditioning on an outcome of probability zero.
class ZeroProbabilityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Ensembles passed to the steering construction mix to different boxes.
class IncompatibleEnsemblesError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Target state outside the region a blind-steering construction supports.
class RegionError : public Error {
 public:
  using Error::Error;
};

/// Linear feasibility problem without a solution.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace nsbox

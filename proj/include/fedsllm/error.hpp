#pragma once

#include <stdexcept>
#include <string>

namespace fedsllm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Configuration file missing, unparsable, or violating a constraint.
/// `key()` names the offending key when there is one.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg, std::string key = {})
      : Error(msg), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Requested rate is at or above the Shannon ceiling of the link.
class InfeasibleRateError : public Error {
 public:
  using Error::Error;
};

/// The f_s^max > f_k^max precondition of the A* = A_min reduction fails.
class ReductionInvalidError : public Error {
 public:
  using Error::Error;
};

/// A latency solve could not produce a feasible allocation.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Learning hyperparameters violate a convergence hypothesis, or local
/// training diverged.
class HyperparameterError : public Error {
 public:
  using Error::Error;
};

/// Matrix or dataset shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// File read/write failure; the message carries the path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace fedsllm

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace l12ds {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix/vector sizes are inconsistent or outside the supported regime.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A scalar parameter is outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// The matrix has a structural defect (e.g. a zero column).
class DegenerateMatrixError : public Error {
 public:
  using Error::Error;
};

/// A metric is undefined for the given input (e.g. zero reference signal).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

/// Exhaustive enumeration would exceed the configured budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// A recovery theorem was evaluated outside its hypotheses.
class ConditionViolatedError : public Error {
 public:
  using Error::Error;
};

/// A configuration file or command-line option is malformed.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver produced a non-finite iterate.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t iteration)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace l12ds

#pragma once

#include <stdexcept>
#include <string>

namespace wfboot {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad dimensions, non-finite entries, out-of-range arguments.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Fewer than r usable eigenvalues, or a non-positive eigenvalue where one
/// must be inverted.
class DegenerateSpectrumError : public Error {
 public:
  using Error::Error;
};

/// The canonical rotation is not unique (tied signal eigenvalues or a
/// non-positive-definite signal covariance).
class IdentificationError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be inverted is singular to working precision.
class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

/// The regressor Gram matrix fails the condition-number guard.
class CollinearityError : public Error {
 public:
  CollinearityError(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

}  // namespace wfboot

#pragma once

#include <stdexcept>
#include <string>

namespace touchpoint {

/// Base for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: dimension mismatch, non-finite entries, non-square operators.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A scalar parameter outside its admissible range (step sizes, tolerances).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A mathematical hypothesis of an operation does not hold for the given data.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An operator that must be bijective is numerically singular.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// A problem that is structurally trivial (e.g. fewer than two sets).
class DegenerateProblemError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver hit its cap before meeting its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

}  // namespace touchpoint

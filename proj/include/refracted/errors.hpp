#pragma once

#include <stdexcept>
#include <string>

namespace refracted {

// Base for every failure of a numerical procedure (as opposed to bad input).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class QuadratureError : public NumericalError {
 public:
  QuadratureError(const std::string& what, double lo, double hi, double residual)
      : NumericalError(what), lo_(lo), hi_(hi), residual_(residual) {}

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double residual() const { return residual_; }

 private:
  double lo_;
  double hi_;
  double residual_;
};

class InversionError : public NumericalError {
 public:
  InversionError(const std::string& what, double abscissa)
      : NumericalError(what), abscissa_(abscissa) {}

  double abscissa() const { return abscissa_; }

 private:
  double abscissa_;
};

// Raised when a quantity that must be nonnegative comes out clearly negative.
class ConsistencyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Requested operation is not available for the given jump family.
class CapabilityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace refracted

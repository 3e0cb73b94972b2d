#pragma once

#include <stdexcept>
#include <string>

namespace scare {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A Gram matrix that must be SPD hit a non-positive pivot.
class SpdViolation : public Error {
 public:
  SpdViolation(const std::string& what, long pivot)
      : Error(what), pivot_(pivot) {}
  long pivot() const noexcept { return pivot_; }

 private:
  long pivot_;
};

/// The shift cannot be used: A - gamma*E or the SMW core is singular.
class ShiftRejected : public Error {
 public:
  using Error::Error;
};

/// No admissible shift could be produced from the projected problem.
class ShiftFailure : public Error {
 public:
  using Error::Error;
};

/// The iteration could not continue (repeated shift rejection or an
/// indefinite Gram matrix that survived every retry).
class NumericalBreakdown : public Error {
 public:
  NumericalBreakdown(const std::string& what, long iteration)
      : Error(what), iteration_(iteration) {}
  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

/// Input violates a modelling assumption (R not SPD, ...).
class AssumptionViolation : public Error {
 public:
  using Error::Error;
};

/// The middle matrix I + Bhat' x X x Bhat is singular or indefinite.
class DefinitenessError : public Error {
 public:
  using Error::Error;
};

/// nu0 = 0: the right-hand side vanishes.
class DegenerateProblem : public Error {
 public:
  using Error::Error;
};

/// A reference solver could not produce an answer.
class OracleFailure : public Error {
 public:
  using Error::Error;
};

/// Problem files are missing, malformed or inconsistent.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// Shape string "r x c" for error messages.
std::string shape_string(long rows, long cols);

}  // namespace scare

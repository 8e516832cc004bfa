#pragma once

#include <stdexcept>
#include <string>

namespace deltaflow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Checked weight or integer arithmetic left the 64-bit range.
class OverflowError : public Error {
 public:
  using Error::Error;
};

// Values of incompatible group types met on one edge or operator.
class TypeMismatch : public Error {
 public:
  using Error::Error;
};

// Malformed circuit: dangling ids, illegal cycles, scope violations.
class CircuitError : public Error {
 public:
  using Error::Error;
};

// A nested clock domain hit its iteration cap before its termination test held.
class NonTermination : public Error {
 public:
  explicit NonTermination(const std::string& what, std::size_t iterations)
      : Error(what), iterations_(iterations) {}
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::size_t iterations_;
};

// Bad user input: schemas, NULL/NaN values, unknown names, malformed files.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A precondition of an algebraic operation does not hold (e.g. MIN on a
// non-positive Z-set, AVG of an empty Z-set).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace deltaflow

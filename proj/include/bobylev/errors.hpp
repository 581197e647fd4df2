#pragma once

#include <stdexcept>
#include <string>

namespace bobylev {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Quadrature refinements disagree beyond the requested tolerance.
class AccuracyError : public Error {
 public:
  using Error::Error;
};

// Radial-grid evaluation beyond the last grid radius.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Operation applied to a characteristic-function variant it does not support.
class VariantError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class StepSizeError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// A guaranteed inequality failed at runtime.
class VerificationError : public Error {
 public:
  using Error::Error;
};

}  // namespace bobylev

#pragma once

#include <stdexcept>
#include <string>

namespace optexp {

// Base of everything thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A constructed object or a call precondition violates a documented invariant.
// The CLI maps these to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A numerical routine failed to reach its accuracy or stability contract.
// The CLI maps these to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class QuadratureNonConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class WidthExceedsBound : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnassignedState : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IncompatibleExperiments : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptyMassRegion : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ZeroMarginal : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NegativeWeight : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonLipschitzSignal : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class UnimodalityViolation : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Scenario-file problems: malformed JSON, unknown keys, missing fields.
class ScenarioError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace optexp

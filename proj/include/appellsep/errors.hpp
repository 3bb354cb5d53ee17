#pragma once

#include <stdexcept>
#include <string>

namespace appellsep {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArityMismatch : public Error {
 public:
  using Error::Error;
};

// A coordinate carrying a negative exponent is zero at the evaluation point.
class PoleError : public Error {
 public:
  using Error::Error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class OutOfDomain : public Error {
 public:
  using Error::Error;
};

class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

class CalibrationFailure : public Error {
 public:
  using Error::Error;
};

// Trajectory entered the exclusion zone around a singular axis of the potential.
class SingularityApproach : public Error {
 public:
  using Error::Error;
};

class StepFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace appellsep

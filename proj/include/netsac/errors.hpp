#pragma once

#include <stdexcept>
#include <string>

namespace netsac {

// Base class for every failure raised by the library. The CLI maps each
// subclass to a distinct exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent configuration / model input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// The requested computation does not apply to this kind of model
// (e.g. exact oracle on the wireless environment).
class ModelClassError : public Error {
 public:
  using Error::Error;
};

// Instance exceeds an enumeration or memory guard.
class SizeGuardError : public Error {
 public:
  using Error::Error;
};

// Non-ergodic chain, singular system, non-convergent iteration.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace netsac

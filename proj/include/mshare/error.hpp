#pragma once

#include <stdexcept>
#include <string>

namespace mshare {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A state that should not exist (empty market, unknown unit index, ...).
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

/// A parameter, patch or file violates a documented constraint.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A removal policy was evaluated outside its domain.
class UndefinedPolicyError : public Error {
 public:
  using Error::Error;
};

/// The full conditional has no mass anywhere (e.g. theta = 0 with n = 1).
class DegenerateConditionalError : public Error {
 public:
  using Error::Error;
};

/// Rejection sampling exhausted its attempt budget.
class SamplerError : public Error {
 public:
  using Error::Error;
};

/// An exact enumeration would exceed the configured state-space cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mshare

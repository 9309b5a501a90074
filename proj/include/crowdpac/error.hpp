#pragma once

#include <stdexcept>
#include <string>

namespace crowdpac {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside its documented domain (eps not in (0,1), p = 1/2, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Scalar instance handed to a bit-vector hypothesis, wrong bit width, etc.
class InstanceSpaceMismatch : public Error {
 public:
  using Error::Error;
};

/// Majority vote over an even committee.
class TieForbidden : public Error {
 public:
  using Error::Error;
};

class UnknownLabeler : public Error {
 public:
  using Error::Error;
};

/// No candidate passed the conditioning tests within the rejection cap.
class RejectionBudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// Appending to the labeler-pool conditioning would exceed the pruning budget.
class ConditioningBudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// Robust learner restarted more often than its safety envelope allows.
class RestartEnvelopeExceeded : public Error {
 public:
  using Error::Error;
};

/// Malformed or out-of-range experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace crowdpac

#pragma once

#include <stdexcept>
#include <string>

namespace idleq {

// Base for every error the library raises. Callers that only care about
// "something went wrong in idleq" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user input: config files, CLI flags, constructor arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Hazard requested where the survival function has underflowed to zero.
class PastSupportEdge : public DomainError {
 public:
  using DomainError::DomainError;
};

// Utilization cost failed the increasing/convexity probe.
class InvalidCost : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// A modelling assumption (bounded or non-increasing patience hazard) failed.
class AssumptionViolated : public Error {
 public:
  using Error::Error;
};

class GridOverflow : public Error {
 public:
  using Error::Error;
};

class TruncationError : public Error {
 public:
  using Error::Error;
};

}  // namespace idleq

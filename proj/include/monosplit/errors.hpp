#pragma once

#include <stdexcept>
#include <string>

namespace monosplit {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The operator lacks the capability (EVAL, RESOLVENT, GRAPH_SAMPLE) an operation needs.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid construction input or violated precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A dense linear solve was numerically singular. For a monotone operator this
/// cannot happen and points to a construction bug.
class SingularSolveError : public Error {
 public:
  using Error::Error;
};

class BasePointMismatch : public Error {
 public:
  using Error::Error;
};

class OracleError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace monosplit

#pragma once

#include <stdexcept>
#include <string>

namespace sawlab {

/// Base class of every error raised by the library. The CLI maps the
/// concrete type onto a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidPath : public Error {
 public:
  using Error::Error;
};

/// Exhaustive enumeration would exceed the configured budget; use a sampler.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class CapExceeded : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class ParamError : public Error {
 public:
  using Error::Error;
};

/// A line class selected for averaging has no members.
class EmptyClass : public Error {
 public:
  using Error::Error;
};

class EnsembleMismatch : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class CorruptState : public Error {
 public:
  using Error::Error;
};

}  // namespace sawlab

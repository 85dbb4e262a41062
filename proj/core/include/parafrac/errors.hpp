#pragma once

#include <stdexcept>
#include <string>

namespace parafrac {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the declared domain of an operation.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Too few levels, atoms or samples to produce a meaningful estimate.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// The operation is not defined for the given parameter regime
/// (for example an isotropy test in one dimension).
class NotApplicableError : public Error {
 public:
  using Error::Error;
};

/// A sampling or resolution precondition is violated.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Missing or inconsistent inputs to a closed-form calculation.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration; `key()` names the offending entry.
class ValidationError : public Error {
 public:
  ValidationError(std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace parafrac

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace adlm {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument or input document was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// I/O failure on a local file (unreadable corpus, truncated model file, ...).
class IoError : public Error {
 public:
  using Error::Error;
};

/// The key names a different model than the provider in use.
class ModelMismatch : public Error {
 public:
  using Error::Error;
};

/// The remote bridge could not be reached or answered with an error.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// The truncated pools stayed at size one for too long to embed anything.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Extraction observed a token the replayed generation could not have emitted.
class DesyncError : public Error {
 public:
  DesyncError(std::size_t step, const std::string& what)
      : Error("desync at step " + std::to_string(step) + ": " + what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace adlm

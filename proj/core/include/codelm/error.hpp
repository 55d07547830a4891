// SPDX-License-Identifier: Apache-2.0
//
// Exception hierarchy shared by all codelm modules.

#pragma once

#include <stdexcept>
#include <string>

namespace codelm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written. The message names the path.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed on-disk data: manifests, checkpoints, score tables.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Caller passed arguments that violate an operation's preconditions.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A NaN or infinity appeared where the math guarantees finite values.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace codelm

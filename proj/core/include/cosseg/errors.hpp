#pragma once

#include <stdexcept>
#include <string>

namespace cosseg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration or argument violates its documented invariants.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Matrix or vector shapes do not agree.
class ShapeError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// A mathematical operation is undefined for its input (e.g. cosine of a zero vector).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A text file could not be parsed.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// The header line of a text file is malformed or carries the wrong magic.
class HeaderError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// A working buffer would exceed the configured capacity or failed to allocate.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace cosseg

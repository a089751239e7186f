#pragma once

#include <stdexcept>
#include <string>

namespace marsupial {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Input bytes do not follow the expected format.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// An input collection that must hold data is empty.
class EmptyInputError : public Error {
 public:
  using Error::Error;
};

/// A query position lies outside the grid domain.
class OutOfBoundsError : public Error {
 public:
  using Error::Error;
};

/// A parameter violates its documented precondition.
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

}  // namespace marsupial

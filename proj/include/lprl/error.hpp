#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lprl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite or otherwise malformed numeric input.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// An argument outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A search ran out of its step budget or left the representable range.
/// `progress()` carries the partial quantity reached when the search stopped.
class ResourceLimit : public Error {
 public:
  ResourceLimit(const std::string& what, double progress)
      : Error(what), progress_(progress) {}

  double progress() const noexcept { return progress_; }

 private:
  double progress_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " (at offset " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace lprl

#pragma once

#include <stdexcept>
#include <string>

namespace seqloc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller passed arguments that violate an operation's preconditions.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Input data is well-formed but inconsistent (dimension mismatch, missing ground truth).
class DataError : public Error {
 public:
  using Error::Error;
};

enum class ParseErrorKind {
  io,
  empty_input,
  unsupported_format,
  malformed_header,
  truncated_data,
  malformed_record,
};

/// A file could not be decoded. `kind()` distinguishes the failure modes.
class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  ParseErrorKind kind() const noexcept { return kind_; }

 private:
  ParseErrorKind kind_;
};

/// An internal invariant did not hold. Indicates a bug, not bad input.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace seqloc

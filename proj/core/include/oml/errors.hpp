#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oml {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input text (bad token, duplicate index, ragged row, ...).
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_ = 0;
};

/// Value exceeds dimensions declared by a header or dataset.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// Invalid run configuration (bad fraction, empty split, d >= q, ...).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Operands with incompatible shapes.
class ShapeError : public Error {
public:
  using Error::Error;
};

/// Non-finite values where finite arithmetic is required.
class NumericError : public Error {
public:
  using Error::Error;
};

/// Operation requires state that is absent (e.g. empty neighbor store).
class StateError : public Error {
public:
  using Error::Error;
};

/// Invalid query (k out of range, empty neighbor list, ...).
class QueryError : public Error {
public:
  using Error::Error;
};

/// The exact metric update hit a singular (I - 2*lambda*A); callers may
/// fall back to the first-order rule.
class SingularUpdateError : public Error {
public:
  using Error::Error;
};

/// File could not be opened or written.
class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace oml

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace abcd {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Array shapes disagree. Carries the axis that failed to match.
class DimensionError : public Error {
 public:
  DimensionError(const std::string& where, const std::string& axis,
                 std::size_t expected, std::size_t actual)
      : Error(where + ": dimension mismatch on axis '" + axis + "' (expected " +
              std::to_string(expected) + ", got " + std::to_string(actual) + ")"),
        axis_(axis),
        expected_(expected),
        actual_(actual) {}

  const std::string& axis() const noexcept { return axis_; }
  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::string axis_;
  std::size_t expected_;
  std::size_t actual_;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class InternalError : public Error {
 public:
  using Error::Error;
};

/// Unknown or missing column.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& message, std::string column)
      : Error(message), column_(std::move(column)) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

/// Malformed input row. `line` is 1-based and counts the header.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class OrderingError : public Error {
 public:
  using Error::Error;
};

}  // namespace abcd

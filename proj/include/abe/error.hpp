#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace abe {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Errors caused by bad inputs (config, schema, CSV content). The CLI maps
// these to exit code 1; everything else is a runtime failure (exit code 2).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ParseError : public ValidationError {
 public:
  ParseError(std::size_t row, std::size_t column, const std::string& what)
      : ValidationError("row " + std::to_string(row) + ", column " + std::to_string(column) + ": " + what),
        row_(row),
        column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

class InsufficientDataError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Random-guess baseline with zero spread, SA is undefined.
class UndefinedBaselineError : public Error {
 public:
  using Error::Error;
};

// Objective evaluator produced a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

}  // namespace abe

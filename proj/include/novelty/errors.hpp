#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace novelty {

/// Base for every error caused by bad input data (CLI exit status 2).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConflictError : public DataError {
 public:
  using DataError::DataError;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class ValidationError : public DataError {
 public:
  using DataError::DataError;
};

/// Operation is mathematically undefined for the given inputs
/// (zero marginal, empty window, degenerate design).
class UndefinedError : public DataError {
 public:
  using DataError::DataError;
};

/// A model fit did not converge (CLI exit status 3 when fatal).
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace novelty

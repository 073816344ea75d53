#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ccrtd {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a function (e.g. quantile at F=1).
class DomainError : public Error {
 public:
  using Error::Error;
};

class DegenerateDistributionError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefiniteError : public Error {
 public:
  using Error::Error;
};

class IslandingError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

class BalanceError : public Error {
 public:
  using Error::Error;
};

class InfeasibleConfigError : public Error {
 public:
  using Error::Error;
};

class ConvexityViolationError : public Error {
 public:
  using Error::Error;
};

/// Schema validation failure; carries the JSON path of the offending field.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Malformed CSV input; `line` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t line, const std::string& message)
      : Error(file + ":" + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ccrtd

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mixintent {

// Every library failure derives from Error so callers can catch one type.
// The subclasses carry the category the CLI maps onto its exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : ParseError(what, 0) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::size_t iterations)
      : Error(what + " (after " + std::to_string(iterations) + " iterations)"), iterations_(iterations) {}

  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::size_t iterations_;
};

// Training cannot proceed on the supplied labels (e.g. a single class).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

}  // namespace mixintent

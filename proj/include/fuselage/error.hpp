#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace fuselage {

// Base of every error the library throws. Subclasses identify the failure
// category so callers (the CLI in particular) can report it precisely.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text input. `line` is 1-based, 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t line, const std::string& what)
      : Error(file + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

// Bad binary layout, magic number, or unsupported channel count.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A binary file whose length is not a whole number of records.
class TruncationError : public FormatError {
 public:
  using FormatError::FormatError;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

// A value outside its documented domain (pixel > maxval, score > 1, ...).
class RangeError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fuselage

#pragma once

#include <stdexcept>
#include <string>

namespace orsim {

// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated a documented precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// File contents could be read but not understood (bit depth, magic, header).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Malformed line in a text file; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

// Training data cannot produce a classifier (single class, no positives).
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

}  // namespace orsim

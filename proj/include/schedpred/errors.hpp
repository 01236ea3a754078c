#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace schedpred {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedRow : public Error {
 public:
  MalformedRow(std::size_t line, std::string reason)
      : Error("malformed row at line " + std::to_string(line) + ": " + reason),
        line_(line),
        reason_(std::move(reason)) {}

  std::size_t line() const { return line_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class InvalidFraction : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class MissingSubmit : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

class ArityMismatch : public Error {
 public:
  using Error::Error;
};

class TooFewSamples : public Error {
 public:
  using Error::Error;
};

class SchemaMismatch : public Error {
 public:
  using Error::Error;
};

class LedgerMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace schedpred

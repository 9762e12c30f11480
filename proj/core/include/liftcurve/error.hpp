#pragma once

#include <stdexcept>
#include <string>

namespace liftcurve {

// Base class for all library errors. Callers that only need a message can
// catch this; the CLI maps the concrete subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Input file structure is wrong (e.g. a required CSV column is missing).
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Coefficient registry or command configuration is invalid or incomplete.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Not enough observations for the requested estimate.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// Data is degenerate for the requested estimate (zero spread, zero range).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

}  // namespace liftcurve

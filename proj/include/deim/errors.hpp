#pragma once

#include <stdexcept>
#include <string>

namespace deim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid or contradictory configuration (bad key, even kernel width, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input file; the message carries the file and line number.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input whose content is unusable (unknown label, missing group).
class DataError : public Error {
 public:
  using Error::Error;
};

class CacheMissError : public DataError {
 public:
  using DataError::DataError;
};

// NaN/Inf encountered where finite values are required.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace deim

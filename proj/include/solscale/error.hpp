#pragma once

#include <stdexcept>
#include <string>

namespace solscale {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched ranks or vector lengths.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Arguments outside the mathematical domain (nonpositive scale, NaN, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Enumeration or radius budget exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

class InvalidShapeError : public Error {
 public:
  using Error::Error;
};

// Index or coordinate out of the representable range.
class RangeError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace solscale

#pragma once

#include <stdexcept>
#include <string>

namespace causalwr {

// Base of every error raised by the library. Messages name the offending
// field, row or level so that CLI users can act on them directly.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed arguments: dimension mismatches, out-of-range parameters,
// unknown categorical levels, non-binary outcomes where binary are needed.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Structurally valid input on which the requested quantity is undefined,
// e.g. an empty treatment arm or a pair set where every pair was dropped.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

// The request is well-formed but outside what the implementation supports
// (continuous outcome spaces for exact enumeration, oversized lattices).
class Unsupported : public Error {
 public:
  using Error::Error;
};

// Invalid configuration file or CLI flag combination.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace causalwr

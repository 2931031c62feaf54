#pragma once

#include <stdexcept>
#include <string>

namespace facemotion {

// Base of every error thrown by the library. The CLI maps each subclass to a
// distinct exit code (see docs/cli.md).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes of two inputs disagree (frame width, latent width, sequence length).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A model or config is internally inconsistent or lacks a required entry.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A file could not be parsed: bad magic, version, truncated payload.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure. Message carries the offending path.
class IoError : public Error {
 public:
  using Error::Error;
};

// A value cannot be computed for these inputs (too short, empty set).
class ComputationError : public Error {
 public:
  using Error::Error;
};

}  // namespace facemotion

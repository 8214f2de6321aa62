#pragma once

#include <stdexcept>
#include <string>

namespace vitag {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data (corpus files, cluster files, model files).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Structurally valid input that violates a contract (empty corpus,
// misaligned pred/gold, bad fold count).
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or flag combination.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace vitag

#pragma once

#include <stdexcept>
#include <string>

namespace aqcast {

/// Base class for every recoverable error raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// CSV header or config schema problems (names the offending column/key).
struct SchemaError : Error {
  using Error::Error;
};

// Unparseable cell, timestamp or checkpoint token.
struct ParseError : Error {
  using Error::Error;
};

// Non-increasing timestamps.
struct OrderingError : Error {
  using Error::Error;
};

// A missing value with no available neighbors within the window.
struct ImputationError : Error {
  using Error::Error;
};

// Dimension mismatches anywhere in the numeric stack.
struct ShapeError : Error {
  using Error::Error;
};

// Empty period, empty slice, or an out-of-range request.
struct RangeError : Error {
  using Error::Error;
};

// A split that would leave one partition empty or below minimum size.
struct SplitError : Error {
  using Error::Error;
};

// Not enough rows/windows for the requested operation.
struct InsufficientDataError : Error {
  using Error::Error;
};

// Invalid experiment configuration (names the key).
struct ConfigError : Error {
  using Error::Error;
};

// Forward/backward cache does not belong to these parameters.
struct StateError : Error {
  using Error::Error;
};

// Non-finite training loss; carries the epoch it was first seen in.
struct DivergenceError : Error {
  DivergenceError(const std::string& message, std::size_t epoch_index)
      : Error(message), epoch(epoch_index) {}
  std::size_t epoch;
};

// File system failures (unreadable input, unwritable output).
struct IoError : Error {
  using Error::Error;
};

}  // namespace aqcast

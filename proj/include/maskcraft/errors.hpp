#pragma once

#include <stdexcept>
#include <string>

namespace maskcraft {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument passed to an operation (bad sizes, counts, flags).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Malformed input document; the message names the offending record.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A file referenced by an input could not be read.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// RLE counts inconsistent with the declared mask shape.
class CodecError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent model or head configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Geometry precondition violated (degenerate boxes, shape mismatch).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint cannot be used with the requested configuration.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss or otherwise could not continue.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace maskcraft

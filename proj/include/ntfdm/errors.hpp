#pragma once

#include <stdexcept>
#include <string>

namespace ntfdm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration value violates its documented range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Input is too short (or a count too large) for the requested operation.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// A computation produced a non-finite value.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A signal file could not be read. The message carries line/offset context.
class IngestionError : public Error {
 public:
  using Error::Error;
};

}  // namespace ntfdm

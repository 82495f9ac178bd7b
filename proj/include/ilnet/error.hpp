#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ilnet {

// Base for every error this library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Layer/head dimensions that do not fit together.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Bad caller-supplied data (degenerate boxes, crops too small, length mismatch).
class InputError : public Error {
 public:
  using Error::Error;
};

// A window or sample position that falls outside a feature map.
class RangeError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

// Rejection sampler hit its attempt cap.
class SamplingError : public Error {
 public:
  using Error::Error;
};

// Malformed weight stream; offset is the byte position where parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Sequence loading problems; carries file and line when known.
class IngestionError : public Error {
 public:
  using Error::Error;
};

class SpecError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ilnet

// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>
#include <string>

namespace flowhigh {

// Error categories map one-to-one onto the C API status codes.
enum class ErrorKind {
  kDomain,       // precondition violated (bad rate, shape mismatch, ...)
  kFormat,       // malformed file contents
  kUnsupported,  // well-formed but unsupported file variant
  kIo,           // filesystem failure
  kConfig,       // invalid or inconsistent configuration
  kData,         // missing or unusable data set
  kNumeric,      // non-finite values during integration or training
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define FLOWHIGH_DEFINE_ERROR(Name, Kind)                                   \
  class Name : public Error {                                               \
   public:                                                                  \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

FLOWHIGH_DEFINE_ERROR(DomainError, kDomain)
FLOWHIGH_DEFINE_ERROR(FormatError, kFormat)
FLOWHIGH_DEFINE_ERROR(UnsupportedError, kUnsupported)
FLOWHIGH_DEFINE_ERROR(IoError, kIo)
FLOWHIGH_DEFINE_ERROR(ConfigError, kConfig)
FLOWHIGH_DEFINE_ERROR(DataError, kData)
FLOWHIGH_DEFINE_ERROR(NumericError, kNumeric)

#undef FLOWHIGH_DEFINE_ERROR

}  // namespace flowhigh

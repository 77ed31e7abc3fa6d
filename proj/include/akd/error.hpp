#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace akd {

enum class ErrorKind {
  InvalidDimension,
  DimensionMismatch,
  InvalidSchedule,
  IndexOutOfRange,
  InvalidArgument,
  NumericalFailure,
  StepSize,
  UndefinedReference,
  MalformedContainer,
  ConfigValidation,
  Usage,
  Io,
};

/// Stable machine-readable name, used as the "category" field of CLI errors.
std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, std::string const &message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, std::string const &message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, std::string const &message) {
  if (!condition) {
    throw Error(kind, message);
  }
}

} // namespace akd

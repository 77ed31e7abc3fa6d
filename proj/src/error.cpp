#include "akd/error.hpp"

namespace akd {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::InvalidDimension: return "invalid-dimension";
  case ErrorKind::DimensionMismatch: return "dimension-mismatch";
  case ErrorKind::InvalidSchedule: return "invalid-schedule";
  case ErrorKind::IndexOutOfRange: return "index-out-of-range";
  case ErrorKind::InvalidArgument: return "invalid-argument";
  case ErrorKind::NumericalFailure: return "numerical-failure";
  case ErrorKind::StepSize: return "step-size";
  case ErrorKind::UndefinedReference: return "undefined-reference";
  case ErrorKind::MalformedContainer: return "malformed-container";
  case ErrorKind::ConfigValidation: return "config-validation";
  case ErrorKind::Usage: return "usage";
  case ErrorKind::Io: return "io";
  }
  return "unknown";
}

} // namespace akd

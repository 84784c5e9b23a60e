#include "vapor/error.hpp"

namespace vapor {

ErrorCategory category(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::ConfigParse:
    case ErrorCode::DataFormat:
      return ErrorCategory::Input;
    case ErrorCode::SingularNormalMatrix:
    case ErrorCode::PeakNotFound:
    case ErrorCode::NotConverged:
      return ErrorCategory::Fit;
    default:
      return ErrorCategory::Physics;
  }
}

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::WindowTooCoarse: return "window-too-coarse";
    case ErrorCode::NoExtremum: return "no-extremum-in-window";
    case ErrorCode::NoZeroCrossing: return "no-zero-crossing";
    case ErrorCode::DegenerateGeometry: return "degenerate-geometry";
    case ErrorCode::GridResolution: return "grid-resolution";
    case ErrorCode::Aliasing: return "aliasing";
    case ErrorCode::PinholeUnresolved: return "pinhole-unresolved";
    case ErrorCode::SingularNormalMatrix: return "singular-normal-matrix";
    case ErrorCode::PeakNotFound: return "peak-not-found";
    case ErrorCode::NotConverged: return "not-converged";
    case ErrorCode::ConfigParse: return "config-parse";
    case ErrorCode::DataFormat: return "data-format";
  }
  return "unknown";
}

}  // namespace vapor

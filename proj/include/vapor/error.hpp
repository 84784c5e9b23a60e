#pragma once

#include <stdexcept>
#include <string>

namespace vapor {

enum class ErrorCode {
  InvalidArgument,
  // lineshape
  WindowTooCoarse,
  NoExtremum,
  NoZeroCrossing,
  // medium
  DegenerateGeometry,
  // beam
  GridResolution,
  Aliasing,
  PinholeUnresolved,
  // fit
  SingularNormalMatrix,
  PeakNotFound,
  NotConverged,
  // io
  ConfigParse,
  DataFormat,
};

// Process exit status grouping used by the CLI: 2 config/input, 3 physics or
// grid, 4 fit.
enum class ErrorCategory { Input, Physics, Fit };

ErrorCategory category(ErrorCode code) noexcept;
const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace vapor

//
// comove - co-moving stereo toolkit
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace comove {

// Every failure the core can report. The C API mirrors these one-to-one.
enum class ErrorCode {
  kInvalidInput = 1,
  kConfig,
  kIo,
  kDegenerateProjection,
  kNoConvergence,
  kOutOfRange,
  kEmptyTrack,
  kInconsistentTargets,
  kNoPeriodFound,
  kInfeasibleProfile,
  kTargetOutOfView,
  kDegenerateGeometry,
  kBehindCamera,
  kDivergentDepth,
  kMissingTruth,
  kTooFewFrames,
  kBadFit,
  kNoInteriorMinimum,
  kInconsistentMinima,
  kDegenerateConfiguration,
  kMismatchedTargets,
};

// Coarse grouping used for process exit codes.
enum class ErrorCategory { kConfig, kNumeric, kIo };

std::string_view ErrorCodeName(ErrorCode code);
ErrorCategory CategoryOf(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

  // Same error, with `context` prepended to the detail message.
  Error WithContext(const std::string& context) const {
    return Error(code_, context + ": " + detail_);
  }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace comove

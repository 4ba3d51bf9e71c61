//
// comove - co-moving stereo toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "comove/error.hpp"

namespace comove {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kDegenerateProjection: return "DegenerateProjection";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kEmptyTrack: return "EmptyTrack";
    case ErrorCode::kInconsistentTargets: return "InconsistentTargets";
    case ErrorCode::kNoPeriodFound: return "NoPeriodFound";
    case ErrorCode::kInfeasibleProfile: return "InfeasibleProfile";
    case ErrorCode::kTargetOutOfView: return "TargetOutOfView";
    case ErrorCode::kDegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::kBehindCamera: return "BehindCamera";
    case ErrorCode::kDivergentDepth: return "DivergentDepth";
    case ErrorCode::kMissingTruth: return "MissingTruth";
    case ErrorCode::kTooFewFrames: return "TooFewFrames";
    case ErrorCode::kBadFit: return "BadFit";
    case ErrorCode::kNoInteriorMinimum: return "NoInteriorMinimum";
    case ErrorCode::kInconsistentMinima: return "InconsistentMinima";
    case ErrorCode::kDegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::kMismatchedTargets: return "MismatchedTargets";
  }
  return "Unknown";
}

ErrorCategory CategoryOf(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput:
    case ErrorCode::kConfig:
    case ErrorCode::kInfeasibleProfile:
    case ErrorCode::kMissingTruth:
    case ErrorCode::kMismatchedTargets:
      return ErrorCategory::kConfig;
    case ErrorCode::kIo:
      return ErrorCategory::kIo;
    default:
      return ErrorCategory::kNumeric;
  }
}

}  // namespace comove

// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0

#include "lidarnav/error.hpp"

namespace lidarnav {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kEmptyCloud: return "EmptyCloud";
    case ErrorCode::kNoUsableDescriptors: return "NoUsableDescriptors";
    case ErrorCode::kTooFewCorrespondences: return "TooFewCorrespondences";
    case ErrorCode::kNoConsensus: return "NoConsensus";
    case ErrorCode::kNoOverlap: return "NoOverlap";
    case ErrorCode::kBelowMinPoints: return "BelowMinPoints";
    case ErrorCode::kAnomalousScan: return "AnomalousScan";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kLowConfidence: return "LowConfidence";
    case ErrorCode::kBadChecksum: return "BadChecksum";
    case ErrorCode::kNotGga: return "NotGga";
    case ErrorCode::kMalformedField: return "MalformedField";
    case ErrorCode::kEmptyTrajectory: return "EmptyTrajectory";
    case ErrorCode::kDatasetNotFound: return "DatasetNotFound";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kNoTemporalOverlap: return "NoTemporalOverlap";
  }
  return "Unknown";
}

}  // namespace lidarnav

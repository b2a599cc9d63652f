// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0
//
// Error type shared by every module. Each failure mode carries a code so
// callers (and the CLI exit-code mapping) can branch without string matching.

#ifndef LIDARNAV_ERROR_HPP_
#define LIDARNAV_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace lidarnav {

enum class ErrorCode {
  kInvalidArgument,
  kDegenerateGeometry,
  kTooFewPoints,
  kEmptyCloud,
  kNoUsableDescriptors,
  kTooFewCorrespondences,
  kNoConsensus,
  kNoOverlap,
  kBelowMinPoints,
  kAnomalousScan,
  kDimensionMismatch,
  kLowConfidence,
  kBadChecksum,
  kNotGga,
  kMalformedField,
  kEmptyTrajectory,
  kDatasetNotFound,
  kFormatError,
  kNoTemporalOverlap,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Parse failure in a named file; line is 1-based (0 when the file could not
/// be opened or the failure is not line-specific).
class FormatError : public Error {
 public:
  FormatError(std::string file, int line, const std::string& what)
      : Error(ErrorCode::kFormatError,
              file + ":" + std::to_string(line) + ": " + what),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  int line() const noexcept { return line_; }

 private:
  std::string file_;
  int line_;
};

class LowConfidenceError : public Error {
 public:
  explicit LowConfidenceError(double peak)
      : Error(ErrorCode::kLowConfidence,
              "correlation peak " + std::to_string(peak) + " below threshold"),
        peak_(peak) {}

  double peak() const noexcept { return peak_; }

 private:
  double peak_;
};

class MalformedFieldError : public Error {
 public:
  MalformedFieldError(int index, const std::string& what)
      : Error(ErrorCode::kMalformedField,
              "field " + std::to_string(index) + ": " + what),
        index_(index) {}

  int index() const noexcept { return index_; }

 private:
  int index_;
};

}  // namespace lidarnav

#endif  // LIDARNAV_ERROR_HPP_

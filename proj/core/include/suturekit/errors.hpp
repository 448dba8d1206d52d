// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace suturekit {

enum class ErrorCode {
  kInvalidArgument,
  kNonPositiveDepth,
  kDegenerateRays,
  kThetaOutOfRange,
  kEmptyMasks,
  kNoConvergence,
  kUnreachable,
  kFeatureBehindCamera,
  kGaussNewtonDiverged,
  kNoSolution,
  kAmbiguousSolution,
  kRegionNotUnique,
  kNonFiniteLoss,
  kChordTooLong,
  kDegenerateNormal,
  kIo,
};

std::string_view errorCodeName(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. The code lets
/// callers branch on the failure kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(errorCodeName(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace suturekit

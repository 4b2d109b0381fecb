// Copyright 2026 The PSFC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace psfc {

enum class ErrorCode {
  kNotPrime,
  kInversionOfZero,
  kDimensionMismatch,
  kSingularMatrix,
  kInvalidPermutation,
  kKTooLarge,
  kInvalidRegime,
  kUnknownFunction,
  kNonCanonicalElement,
  kChannelClosed,
  kMalformedFrame,
  kDependencyViolation,
  kMissingValue,
  kGuardExceeded,
  kInvalidArgument,
  kInternal,
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotPrime: return "NotPrime";
    case ErrorCode::kInversionOfZero: return "InversionOfZero";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kSingularMatrix: return "SingularMatrix";
    case ErrorCode::kInvalidPermutation: return "InvalidPermutation";
    case ErrorCode::kKTooLarge: return "KTooLarge";
    case ErrorCode::kInvalidRegime: return "InvalidRegime";
    case ErrorCode::kUnknownFunction: return "UnknownFunction";
    case ErrorCode::kNonCanonicalElement: return "NonCanonicalElement";
    case ErrorCode::kChannelClosed: return "ChannelClosed";
    case ErrorCode::kMalformedFrame: return "MalformedFrame";
    case ErrorCode::kDependencyViolation: return "DependencyViolation";
    case ErrorCode::kMissingValue: return "MissingValue";
    case ErrorCode::kGuardExceeded: return "GuardExceeded";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

/// All library failures are reported with this exception type; `code()`
/// identifies the failure class so callers and tests can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace psfc

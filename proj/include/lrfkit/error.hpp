/*
 * Copyright 2026 The LRFKit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LRFKIT_ERROR_HPP_
#define LRFKIT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace lrfkit {

enum class ErrorCode {
  kInvalidInput,
  kEmptyPatch,
  kDegenerateGeometry,
  kInsufficientData,
  kTrainingDiverged,
  kPoseFailure,
  kConfig,
  kData,
};

/// All library failures are reported through this exception; the code
/// distinguishes the failure class for callers that map errors to exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void throw_error(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kEmptyPatch: return "empty-patch";
    case ErrorCode::kDegenerateGeometry: return "degenerate-geometry";
    case ErrorCode::kInsufficientData: return "insufficient-data";
    case ErrorCode::kTrainingDiverged: return "training-diverged";
    case ErrorCode::kPoseFailure: return "pose-failure";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kData: return "data";
  }
  return "unknown";
}

}  // namespace lrfkit

#endif  // LRFKIT_ERROR_HPP_

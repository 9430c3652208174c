// Copyright 2026 The mapcnot Authors
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

#ifndef MAPCNOT_ERRORS_HPP_
#define MAPCNOT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace mapcnot {

enum class ErrorCode {
  kNonHermitianInput,
  kNonUnitaryInput,
  kBadSubsystemIndex,
  kDimensionMismatch,
  kInvalidSpec,
  kInvalidArgument,
  kNoCrossingInRange,
  kCalibrationDiverged,
  kOutOfWindow,
  kNonConvergedStep,
  kOptimizerFailed,
  kFitFailed,
  kDegenerateFrequencies,
  kUnalignedDevice,
  kBadIndex,
  kConfigError,
  kIoError,
  kUnknownExperiment,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonHermitianInput: return "NonHermitianInput";
    case ErrorCode::kNonUnitaryInput: return "NonUnitaryInput";
    case ErrorCode::kBadSubsystemIndex: return "BadSubsystemIndex";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNoCrossingInRange: return "NoCrossingInRange";
    case ErrorCode::kCalibrationDiverged: return "CalibrationDiverged";
    case ErrorCode::kOutOfWindow: return "OutOfWindow";
    case ErrorCode::kNonConvergedStep: return "NonConvergedStep";
    case ErrorCode::kOptimizerFailed: return "OptimizerFailed";
    case ErrorCode::kFitFailed: return "FitFailed";
    case ErrorCode::kDegenerateFrequencies: return "DegenerateFrequencies";
    case ErrorCode::kUnalignedDevice: return "UnalignedDevice";
    case ErrorCode::kBadIndex: return "BadIndex";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kUnknownExperiment: return "UnknownExperiment";
  }
  return "Unknown";
}

// Single exception type for the library; the code selects the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace mapcnot

#endif  // MAPCNOT_ERRORS_HPP_

//------------------------------------------------------------------------------
//
//   Copyright 2026 The flairnorm Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace flairnorm {

enum class ErrorCode {
  InvalidArgument,
  DimsMismatch,
  EmptyMask,
  EmptyList,
  DegenerateRange,
  EdgesMismatch,
  InvalidOverlap,
  // nifti-io
  BadMagic,
  UnsupportedDatatype,
  TruncatedData,
  NonBinaryMask,
  NonFiniteVoxel,
  IoError,
  LossyDatatype,
  // preprocess
  TooSmall,
  NonPositiveIntensity,
  // standardize
  ZeroVariance,
  ModeNotFound,
  NonPositiveMode,
  EmptyTrainingSet,
  NonMonotoneLandmarks,
  ZeroSpread,
  DegenerateHistogram,
  MissingParams,
  // metrics
  EmptyGroundTruth,
  NotNormalized,
  EmptyInput,
  // ensemble
  TooFewMasks,
  // stats
  NonPositiveData,
  TooFewSamples,
  DegenerateData,
  ZeroVarianceBoth,
  IdMismatch,
};

/// Stable identifier for an error code, e.g. "EmptyGroundTruth".
std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so that
/// batch drivers can record it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace flairnorm

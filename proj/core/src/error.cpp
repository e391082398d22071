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
#include "flairnorm/error.hpp"

namespace flairnorm {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimsMismatch: return "DimsMismatch";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::EmptyList: return "EmptyList";
    case ErrorCode::DegenerateRange: return "DegenerateRange";
    case ErrorCode::EdgesMismatch: return "EdgesMismatch";
    case ErrorCode::InvalidOverlap: return "InvalidOverlap";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedDatatype: return "UnsupportedDatatype";
    case ErrorCode::TruncatedData: return "TruncatedData";
    case ErrorCode::NonBinaryMask: return "NonBinaryMask";
    case ErrorCode::NonFiniteVoxel: return "NonFiniteVoxel";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::LossyDatatype: return "LossyDatatype";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::NonPositiveIntensity: return "NonPositiveIntensity";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::ModeNotFound: return "ModeNotFound";
    case ErrorCode::NonPositiveMode: return "NonPositiveMode";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::NonMonotoneLandmarks: return "NonMonotoneLandmarks";
    case ErrorCode::ZeroSpread: return "ZeroSpread";
    case ErrorCode::DegenerateHistogram: return "DegenerateHistogram";
    case ErrorCode::MissingParams: return "MissingParams";
    case ErrorCode::EmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::TooFewMasks: return "TooFewMasks";
    case ErrorCode::NonPositiveData: return "NonPositiveData";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::ZeroVarianceBoth: return "ZeroVarianceBoth";
    case ErrorCode::IdMismatch: return "IdMismatch";
  }
  return "Unknown";
}

}  // namespace flairnorm

// Copyright 2026 The COMET Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "comet/error.hpp"

namespace comet {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DuplicateNode: return "DuplicateNode";
    case ErrorCode::RelationTypeMismatch: return "RelationTypeMismatch";
    case ErrorCode::InvalidNode: return "InvalidNode";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FeatureDimMismatch: return "FeatureDimMismatch";
    case ErrorCode::FeaturesNotLoaded: return "FeaturesNotLoaded";
    case ErrorCode::GraphFrozen: return "GraphFrozen";
    case ErrorCode::SchemaStartMismatch: return "SchemaStartMismatch";
    case ErrorCode::ShapeError: return "ShapeError";
    case ErrorCode::NumericalError: return "NumericalError";
    case ErrorCode::PathTooLong: return "PathTooLong";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::SplitError: return "SplitError";
    case ErrorCode::ExhaustedSpace: return "ExhaustedSpace";
    case ErrorCode::IncompatibleCheckpoint: return "IncompatibleCheckpoint";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::DegenerateConfig: return "DegenerateConfig";
  }
  return "Unknown";
}

}  // namespace comet

// Copyright 2026 The Namecraft Authors.
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

#include "core/error.hpp"

namespace namecraft {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kSchema: return "SchemaError";
    case ErrorCode::kLabel: return "LabelError";
    case ErrorCode::kEmptyName: return "EmptyName";
    case ErrorCode::kRatio: return "RatioError";
    case ErrorCode::kEmptyClass: return "EmptyClass";
    case ErrorCode::kBadProfile: return "BadProfile";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kNotConverged: return "NotConverged";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kTooLong: return "TooLong";
    case ErrorCode::kUnknownChar: return "UnknownChar";
    case ErrorCode::kDiverged: return "Diverged";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kNoMatch: return "NoMatch";
    case ErrorCode::kModelMismatch: return "ModelMismatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kVersion: return "VersionMismatch";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kInternal: return "InternalError";
  }
  return "UnknownError";
}

}  // namespace namecraft

// Copyright 2026 The pgt Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "pgt/error.hpp"

namespace pgt {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::kOutOfGrid: return "OutOfGrid";
    case ErrorCode::kOutOfVolume: return "OutOfVolume";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kMalformedFile: return "MalformedFile";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kMissingFrameData: return "MissingFrameData";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kBehindCamera: return "BehindCamera";
    case ErrorCode::kPixelOutOfRange: return "PixelOutOfRange";
  }
  return "Unknown";
}

}  // namespace pgt

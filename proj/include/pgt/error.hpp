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
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pgt {

enum class ErrorCode {
  kNonPositiveDepth,
  kOutOfGrid,
  kOutOfVolume,
  kConfigInvalid,
  kMalformedFile,
  kMalformedLine,
  kIoError,
  kShapeMismatch,
  kMissingFrameData,
  kDegenerateInput,
  kBehindCamera,
  kPixelOutOfRange,
};

std::string_view ErrorCodeName(ErrorCode code);

/// Single exception type for every recoverable failure in the library; the
/// code tells callers (and the CLI exit-code mapping) what went wrong.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pgt

// Copyright 2026 The avsearch Authors
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

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace avsearch {

using MediaId = std::uint64_t;
using RecordId = std::uint64_t;

enum class ErrorCode {
  kInvalidArgument,
  kEmptyQuery,
  kInvalidKind,
  kIo,
  kFormat,
  kTraining,
  kExtractorMismatch,
  kExtractorUnreachable,
  kExtraction,
  kFederation,
  kConfig,
  kNotFound,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this exception type; `code()`
// is the machine-readable part that the service and CLI map to status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Normalized image-space box, (x0, y0) top-left and (x1, y1) bottom-right.
struct BoundingBox {
  float x0 = 0.0f;
  float y0 = 0.0f;
  float x1 = 1.0f;
  float y1 = 1.0f;

  bool valid() const noexcept {
    return x0 < x1 && y0 < y1 && x0 >= 0.0f && y0 >= 0.0f && x1 <= 1.0f &&
           y1 <= 1.0f;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

}  // namespace avsearch

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

#include "avsearch/common.hpp"

namespace avsearch {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid_argument";
    case ErrorCode::kEmptyQuery:
      return "empty_query";
    case ErrorCode::kInvalidKind:
      return "invalid_kind";
    case ErrorCode::kIo:
      return "io_error";
    case ErrorCode::kFormat:
      return "format_error";
    case ErrorCode::kTraining:
      return "training_error";
    case ErrorCode::kExtractorMismatch:
      return "extractor_mismatch";
    case ErrorCode::kExtractorUnreachable:
      return "extractor_unreachable";
    case ErrorCode::kExtraction:
      return "extraction_error";
    case ErrorCode::kFederation:
      return "federation_error";
    case ErrorCode::kConfig:
      return "config_error";
    case ErrorCode::kNotFound:
      return "not_found";
  }
  return "unknown";
}

}  // namespace avsearch

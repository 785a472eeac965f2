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

#include "avsearch/extract.hpp"

#include <algorithm>
#include <cmath>

#include "avsearch/vector_math.hpp"

namespace avsearch {

std::string_view to_string(Modality modality) {
  switch (modality) {
    case Modality::kScene:
      return "scene";
    case Modality::kRegion:
      return "region";
    case Modality::kFace:
      return "face";
    case Modality::kAudio:
      return "audio";
  }
  return "scene";
}

std::optional<Modality> parse_modality(std::string_view name) {
  for (Modality m : kAllModalities) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

std::string_view to_string(PayloadKind kind) {
  switch (kind) {
    case PayloadKind::kText:
      return "text";
    case PayloadKind::kImage:
      return "image";
    case PayloadKind::kAudio:
      return "audio";
  }
  return "text";
}

std::optional<PayloadKind> parse_payload_kind(std::string_view name) {
  if (name == "text") return PayloadKind::kText;
  if (name == "image") return PayloadKind::kImage;
  if (name == "audio") return PayloadKind::kAudio;
  return std::nullopt;
}

Embedding Embedding::from_raw(std::vector<float> values) {
  if (values.empty() || !normalize_in_place(values)) {
    throw Error(ErrorCode::kExtraction, "embedding is empty, zero or not finite");
  }
  Embedding e;
  e.values_ = std::move(values);
  return e;
}

Embedding Embedding::from_unit(std::vector<float> values) {
  for (float v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kExtraction, "embedding is not finite");
  }
  if (values.empty() || std::abs(l2_norm(values) - 1.0) > 1e-4) {
    throw Error(ErrorCode::kExtraction, "embedding is not unit-norm");
  }
  Embedding e;
  e.values_ = std::move(values);
  return e;
}

float cosine(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::kInvalidArgument, "dimension mismatch");
  return dot(a.values(), b.values());
}

std::string describe(const ExtractorDescriptor& d) {
  return d.name + "@" + d.version + "/" + std::string(to_string(d.modality)) + "/" +
         std::to_string(d.dim);
}

void require_compatible(const ExtractorDescriptor& index_side,
                        const ExtractorDescriptor& query_side) {
  if (!(index_side == query_side)) {
    throw Error(ErrorCode::kExtractorMismatch,
                "index built with " + describe(index_side) + " cannot be queried with " +
                    describe(query_side));
  }
}

std::vector<TranscriptSegment> validate_transcript(std::vector<TranscriptSegment> segments) {
  std::stable_sort(segments.begin(), segments.end(),
                   [](const auto& a, const auto& b) { return a.start_sec < b.start_sec; });
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (!(s.start_sec < s.end_sec) || s.text.empty()) {
      throw Error(ErrorCode::kExtraction, "transcript segment needs start < end and text");
    }
    if (i > 0 && segments[i - 1].end_sec > s.start_sec) {
      throw Error(ErrorCode::kExtraction, "transcript segments overlap");
    }
  }
  return segments;
}

}  // namespace avsearch

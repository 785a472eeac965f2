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

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "avsearch/common.hpp"
#include "avsearch/extract.hpp"

namespace avsearch {

// Where an embedding came from. Frame-level records span one sampling
// interval; audio records span their window.
struct EmbeddingRecord {
  RecordId id = 0;
  MediaId media_id = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  std::optional<BoundingBox> bbox;
  float detection_score = 1.0f;

  friend bool operator==(const EmbeddingRecord&, const EmbeddingRecord&) = default;
};

// Records and their vectors for one modality. Record ids are dense: the id of
// a record is its position.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(ExtractorDescriptor extractor) : extractor_(std::move(extractor)) {}

  /// Assigns and returns the record id; `record.id` is ignored.
  RecordId append(EmbeddingRecord record, const Embedding& embedding);
  /// Drops every record of the given media and renumbers the rest.
  void remove_media(std::span<const MediaId> media);

  const ExtractorDescriptor& extractor() const noexcept { return extractor_; }
  std::size_t size() const noexcept { return records_.size(); }
  std::size_t dim() const noexcept { return extractor_.dim; }
  const std::vector<EmbeddingRecord>& records() const noexcept { return records_; }
  const EmbeddingRecord& record(RecordId id) const;
  std::span<const float> vectors() const noexcept { return vectors_; }
  std::span<const float> vector(RecordId id) const;
  std::vector<RecordId> ids() const;

  friend bool operator==(const EmbeddingStore&, const EmbeddingStore&) = default;

 private:
  ExtractorDescriptor extractor_;
  std::vector<EmbeddingRecord> records_;
  std::vector<float> vectors_;
};

inline constexpr std::uint32_t kStoreFormatVersion = 1;

void save_store(const EmbeddingStore& store, const std::filesystem::path& path);
EmbeddingStore load_store(const std::filesystem::path& path);

}  // namespace avsearch

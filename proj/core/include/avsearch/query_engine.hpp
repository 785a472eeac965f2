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

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "avsearch/extract.hpp"
#include "avsearch/fts.hpp"
#include "avsearch/ingest.hpp"
#include "avsearch/store.hpp"
#include "avsearch/vector_index.hpp"

namespace avsearch {

enum class QueryModality : std::uint8_t { kScene, kObject, kFace, kAudio, kSpeech, kMetadata };

std::string_view to_string(QueryModality modality);
std::optional<QueryModality> parse_query_modality(std::string_view name);

struct MetadataFilter {
  std::string field;
  std::string value;

  friend bool operator==(const MetadataFilter&, const MetadataFilter&) = default;
};

struct Query {
  QueryModality modality = QueryModality::kScene;
  std::optional<std::string> text;
  std::optional<Exemplar> exemplar;
  /// Refining text for exemplar queries. When absent, `text` plays this role
  /// whenever an exemplar is present.
  std::optional<std::string> compose_text;
  std::optional<double> alpha;
  std::vector<MetadataFilter> filters;
  std::size_t topk = 10;
};

// A single retrieved unit: a frame, region, window, transcript segment or
// media item.
struct Hit {
  MediaId media_id = 0;
  double score = 0.0;
  std::optional<double> t_start;
  std::optional<double> t_end;
  std::optional<BoundingBox> bbox;
  std::optional<std::string> snippet;

  friend bool operator==(const Hit&, const Hit&) = default;
};

struct SegmentHit {
  MediaId media_id = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  double score = 0.0;
  std::size_t support = 0;

  friend bool operator==(const SegmentHit&, const SegmentHit&) = default;
};

struct ResultHit {
  MediaId media_id = 0;
  std::string name;  // file name of the media item
  double score = 0.0;
  std::optional<double> t_start;
  std::optional<double> t_end;
  std::optional<BoundingBox> bbox;
  std::optional<std::string> snippet;
  std::optional<std::size_t> support;
  std::string shard;

  friend bool operator==(const ResultHit&, const ResultHit&) = default;
};

struct SearchResponse {
  std::vector<ResultHit> results;
  bool degraded = false;
  std::vector<std::string> missing_shards;

  friend bool operator==(const SearchResponse&, const SearchResponse&) = default;
};

/// Score descending, then media id, then start time.
bool ranks_before(const Hit& a, const Hit& b) noexcept;
bool ranks_before(const SegmentHit& a, const SegmentHit& b) noexcept;

void rank_and_truncate(std::vector<Hit>& hits, std::size_t topk);
void rank_and_truncate(std::vector<SegmentHit>& hits, std::size_t topk);

/// Groups timed hits of the same media into segments. Hits join the current
/// segment when their start is within `gap_sec` of the previous member's
/// start, or when they start before the segment ends. A segment spans the
/// first member's start to the largest member end and scores the maximum
/// member score. Hits without timestamps are ignored. Output is ordered by
/// (media id, start).
std::vector<SegmentHit> merge_to_segments(std::span<const Hit> hits, double gap_sec);

/// Per-media intersection of two segment lists; overlapping pairs yield the
/// overlap extent with the smaller score and the smaller support.
std::vector<SegmentHit> intersect_segments(std::span<const SegmentHit> a,
                                           std::span<const SegmentHit> b);

/// True when every filter's value tokens equal the tokens of the media
/// item's field.
bool matches_filters(const Metadata& metadata, std::span<const MetadataFilter> filters);

std::vector<Hit> apply_metadata_filter(std::vector<Hit> hits,
                                       std::span<const MetadataFilter> filters,
                                       const Catalog& catalog);
std::vector<SegmentHit> apply_metadata_filter(std::vector<SegmentHit> hits,
                                              std::span<const MetadataFilter> filters,
                                              const Catalog& catalog);

/// normalize(alpha * text + (1 - alpha) * image). Returns the image embedding
/// untouched for alpha = 0 and the text embedding untouched for alpha = 1.
Embedding compose_query_embedding(const Embedding& image, const Embedding& text, double alpha);

struct ParsedQueryText {
  std::string text;  // free text with field tokens removed
  std::vector<MetadataFilter> fields;
};

/// Splits `field:value` and `field:"quoted value"` tokens out of a query.
ParsedQueryText parse_query_text(std::string_view query);

struct ModalityIndex {
  EmbeddingStore store;
  std::unique_ptr<VectorIndex> index;
};

struct TranscriptRecord {
  MediaId media_id = 0;
  double start_sec = 0.0;
  double end_sec = 0.0;
  std::string text;

  friend bool operator==(const TranscriptRecord&, const TranscriptRecord&) = default;
};

// Everything a node searches over. Immutable once published.
struct NodeData {
  Catalog catalog;
  std::array<std::optional<ModalityIndex>, 4> modalities;
  FtsIndex metadata_fts;  // one document per media item, doc id = media id
  FtsIndex transcript_fts;  // doc id = position in `transcripts`
  std::vector<TranscriptRecord> transcripts;

  const ModalityIndex* modality(Modality m) const {
    const auto& slot = modalities[static_cast<std::size_t>(m)];
    return slot ? &*slot : nullptr;
  }
};

struct EngineConfig {
  double face_threshold = 0.5;
  /// Vector hits scoring at or below this are not matches.
  double min_similarity = 0.0;
  double default_alpha = 0.5;
  /// Frame hits closer than this many sampling intervals share a segment.
  double frame_gap_intervals = 2.0;
  /// Nearest-neighbour hits considered per vector search.
  std::size_t candidate_depth = 2000;
  SearchParams search;
  std::string shard_name = "local";
};

// Serves /search for a node or an aggregator.
class SearchBackend {
 public:
  virtual ~SearchBackend() = default;
  virtual SearchResponse search(const Query& query) const = 0;
  virtual nlohmann::json info() const = 0;
  /// Media lookup for /media; aggregators return nullptr.
  virtual const MediaItem* media(MediaId) const { return nullptr; }
};

class Engine final : public SearchBackend {
 public:
  Engine(std::shared_ptr<const NodeData> data, std::shared_ptr<const Extractor> extractor,
         EngineConfig config = {});

  std::vector<SegmentHit> search_scene(const Query& query) const;
  std::vector<Hit> search_objects(const Query& query) const;
  /// Exemplar required. With refining text, runs face-in-scene.
  std::vector<SegmentHit> search_faces(const Query& query) const;
  std::vector<SegmentHit> search_face_in_scene(const Query& query) const;
  std::vector<SegmentHit> search_audio(const Query& query) const;
  std::vector<Hit> search_speech(const Query& query) const;
  std::vector<Hit> search_metadata(const Query& query) const;

  /// The embedding a visual or audio query searches with.
  Embedding query_embedding(Modality modality, const Query& query) const;

  SearchResponse search(const Query& query) const override;
  nlohmann::json info() const override;
  const MediaItem* media(MediaId id) const override { return data_->catalog.find(id); }

  const NodeData& data() const noexcept { return *data_; }
  const EngineConfig& config() const noexcept { return config_; }

 private:
  const ModalityIndex& require(Modality modality) const;
  std::vector<Hit> vector_hits(Modality modality, const Embedding& query,
                               std::span<const MetadataFilter> filters,
                               std::optional<double> min_score = std::nullopt) const;
  double segment_gap(Modality modality) const;

  std::shared_ptr<const NodeData> data_;
  std::shared_ptr<const Extractor> extractor_;
  EngineConfig config_;
};

}  // namespace avsearch

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

#include "avsearch/query_engine.hpp"

#include <algorithm>
#include <map>

#include <nlohmann/json.hpp>

#include "avsearch/extract_protocol.hpp"
#include "avsearch/text.hpp"

namespace avsearch {

namespace {

constexpr std::string_view kQueryModalityNames[] = {"scene",  "object", "face",
                                                    "audio",  "speech", "metadata"};

bool has_tokens(const std::optional<std::string>& text) {
  return text && !tokenize(*text).empty();
}

std::optional<std::string> refining_text(const Query& q) {
  if (has_tokens(q.compose_text)) return q.compose_text;
  if (q.exemplar && has_tokens(q.text)) return q.text;
  return std::nullopt;
}

ResultHit to_result(const Hit& h) {
  ResultHit r;
  r.media_id = h.media_id;
  r.score = h.score;
  r.t_start = h.t_start;
  r.t_end = h.t_end;
  r.bbox = h.bbox;
  r.snippet = h.snippet;
  return r;
}

ResultHit to_result(const SegmentHit& s) {
  ResultHit r;
  r.media_id = s.media_id;
  r.score = s.score;
  r.t_start = s.t_start;
  r.t_end = s.t_end;
  r.support = s.support;
  return r;
}

}  // namespace

std::string_view to_string(QueryModality modality) {
  return kQueryModalityNames[static_cast<std::size_t>(modality)];
}

std::optional<QueryModality> parse_query_modality(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kQueryModalityNames); ++i) {
    if (kQueryModalityNames[i] == name) return static_cast<QueryModality>(i);
  }
  return std::nullopt;
}

Engine::Engine(std::shared_ptr<const NodeData> data, std::shared_ptr<const Extractor> extractor,
               EngineConfig config)
    : data_(std::move(data)), extractor_(std::move(extractor)), config_(std::move(config)) {
  if (!data_ || !extractor_) throw Error(ErrorCode::kInvalidArgument, "engine needs data and an extractor");
  for (Modality m : kAllModalities) {
    if (const ModalityIndex* mi = data_->modality(m)) {
      require_compatible(mi->store.extractor(), extractor_->descriptor(m));
    }
  }
}

Embedding Engine::query_embedding(Modality modality, const Query& query) const {
  if (query.exemplar) {
    Embedding image = extractor_->embed_exemplar(modality, *query.exemplar);
    std::optional<std::string> refine = refining_text(query);
    if (!refine || modality == Modality::kFace) return image;
    Embedding text = extractor_->embed_text(modality, *refine);
    return compose_query_embedding(image, text, query.alpha.value_or(config_.default_alpha));
  }
  if (!has_tokens(query.text)) throw Error(ErrorCode::kEmptyQuery, "query has no text or exemplar");
  return extractor_->embed_text(modality, *query.text);
}

double Engine::segment_gap(Modality modality) const {
  const SamplingConfig& s = data_->catalog.sampling;
  return modality == Modality::kAudio ? s.hop_sec()
                                      : config_.frame_gap_intervals * s.frame_interval_sec();
}

std::vector<Hit> Engine::vector_hits(Modality modality, const Embedding& query,
                                     std::span<const MetadataFilter> filters,
                                     std::optional<double> min_score) const {
  const ModalityIndex* mi = data_->modality(modality);
  if (mi == nullptr || mi->index == nullptr || mi->index->size() == 0) return {};
  auto results = mi->index->search(query, extractor_->descriptor(modality),
                                   config_.candidate_depth, config_.search);
  std::vector<Hit> hits;
  hits.reserve(results.size());
  for (const SearchResult& r : results) {
    if ((min_score && r.score < *min_score) || r.score <= config_.min_similarity) break;
    const EmbeddingRecord& rec = mi->store.record(r.id);
    if (!filters.empty()) {
      const MediaItem* item = data_->catalog.find(rec.media_id);
      if (item == nullptr || !matches_filters(item->metadata, filters)) continue;
    }
    Hit h;
    h.media_id = rec.media_id;
    h.score = r.score;
    h.t_start = rec.t_start;
    h.t_end = rec.t_end;
    h.bbox = rec.bbox;
    hits.push_back(h);
  }
  return hits;
}

std::vector<SegmentHit> Engine::search_scene(const Query& query) const {
  auto hits = vector_hits(Modality::kScene, query_embedding(Modality::kScene, query), query.filters);
  auto segments = merge_to_segments(hits, segment_gap(Modality::kScene));
  rank_and_truncate(segments, query.topk);
  return segments;
}

std::vector<Hit> Engine::search_objects(const Query& query) const {
  auto hits =
      vector_hits(Modality::kRegion, query_embedding(Modality::kRegion, query), query.filters);
  rank_and_truncate(hits, query.topk);
  return hits;
}

std::vector<SegmentHit> Engine::search_faces(const Query& query) const {
  if (!query.exemplar) {
    throw Error(ErrorCode::kInvalidArgument, "face search needs an exemplar");
  }
  if (refining_text(query)) return search_face_in_scene(query);
  auto hits = vector_hits(Modality::kFace, query_embedding(Modality::kFace, query), query.filters,
                          config_.face_threshold);
  auto segments = merge_to_segments(hits, segment_gap(Modality::kFace));
  rank_and_truncate(segments, query.topk);
  return segments;
}

std::vector<SegmentHit> Engine::search_face_in_scene(const Query& query) const {
  if (!query.exemplar) {
    throw Error(ErrorCode::kInvalidArgument, "face search needs an exemplar");
  }
  std::optional<std::string> scene_text = refining_text(query);
  if (!scene_text) throw Error(ErrorCode::kEmptyQuery, "face-in-scene search needs scene text");

  auto face_hits = vector_hits(Modality::kFace, extractor_->embed_exemplar(Modality::kFace, *query.exemplar),
                               query.filters, config_.face_threshold);
  auto faces = merge_to_segments(face_hits, segment_gap(Modality::kFace));
  std::vector<MediaId> media;
  for (const SegmentHit& s : faces) media.push_back(s.media_id);
  std::sort(media.begin(), media.end());

  auto scene_hits = vector_hits(Modality::kScene, extractor_->embed_text(Modality::kScene, *scene_text),
                                query.filters);
  std::erase_if(scene_hits, [&](const Hit& h) {
    return !std::binary_search(media.begin(), media.end(), h.media_id);
  });
  auto scenes = merge_to_segments(scene_hits, segment_gap(Modality::kScene));
  auto both = intersect_segments(faces, scenes);
  rank_and_truncate(both, query.topk);
  return both;
}

std::vector<SegmentHit> Engine::search_audio(const Query& query) const {
  auto hits = vector_hits(Modality::kAudio, query_embedding(Modality::kAudio, query), query.filters);
  auto segments = merge_to_segments(hits, segment_gap(Modality::kAudio));
  rank_and_truncate(segments, query.topk);
  return segments;
}

std::vector<Hit> Engine::search_speech(const Query& query) const {
  if (!has_tokens(query.text)) throw Error(ErrorCode::kEmptyQuery, "speech search needs text");
  std::vector<Hit> hits;
  for (const FtsHit& f : data_->transcript_fts.query(*query.text)) {
    const TranscriptRecord& rec = data_->transcripts.at(f.doc_id);
    Hit h;
    h.media_id = rec.media_id;
    h.score = f.score;
    h.t_start = rec.start_sec;
    h.t_end = rec.end_sec;
    h.snippet = rec.text;
    hits.push_back(std::move(h));
  }
  hits = apply_metadata_filter(std::move(hits), query.filters, data_->catalog);
  rank_and_truncate(hits, query.topk);
  return hits;
}

std::vector<Hit> Engine::search_metadata(const Query& query) const {
  ParsedQueryText parsed = parse_query_text(query.text.value_or(""));
  const bool free_text = !tokenize(parsed.text).empty();
  if (!free_text && parsed.fields.empty()) {
    throw Error(ErrorCode::kEmptyQuery, "metadata search needs text or field:value terms");
  }

  std::optional<std::map<DocId, double>> scores;
  auto intersect = [&](const std::vector<FtsHit>& hits) {
    std::map<DocId, double> next;
    for (const FtsHit& h : hits) {
      if (!scores) {
        next[h.doc_id] = h.score;
      } else if (auto it = scores->find(h.doc_id); it != scores->end()) {
        next[h.doc_id] = it->second + h.score;
      }
    }
    scores = std::move(next);
  };
  if (free_text) intersect(data_->metadata_fts.query(parsed.text));
  for (const MetadataFilter& f : parsed.fields) {
    if (tokenize(f.value).empty()) {
      scores = std::map<DocId, double>{};
      break;
    }
    intersect(data_->metadata_fts.query(f.value, std::string_view(f.field)));
  }

  std::vector<Hit> hits;
  for (const auto& [doc, score] : *scores) hits.push_back({doc, score, {}, {}, {}, {}});
  hits = apply_metadata_filter(std::move(hits), query.filters, data_->catalog);
  rank_and_truncate(hits, query.topk);
  return hits;
}

SearchResponse Engine::search(const Query& query) const {
  Query q = query;
  if (q.modality != QueryModality::kMetadata && q.text) {
    ParsedQueryText parsed = parse_query_text(*q.text);
    q.filters.insert(q.filters.end(), parsed.fields.begin(), parsed.fields.end());
    q.text = parsed.text.empty() ? std::nullopt : std::optional<std::string>(parsed.text);
  }

  SearchResponse response;
  auto add = [&](const auto& hits) {
    for (const auto& h : hits) {
      ResultHit r = to_result(h);
      if (const MediaItem* item = data_->catalog.find(r.media_id)) {
        r.name = item->path.filename().string();
      }
      r.shard = config_.shard_name;
      response.results.push_back(std::move(r));
    }
  };
  switch (q.modality) {
    case QueryModality::kScene: add(search_scene(q)); break;
    case QueryModality::kObject: add(search_objects(q)); break;
    case QueryModality::kFace: add(search_faces(q)); break;
    case QueryModality::kAudio: add(search_audio(q)); break;
    case QueryModality::kSpeech: add(search_speech(q)); break;
    case QueryModality::kMetadata: add(search_metadata(q)); break;
  }
  return response;
}

nlohmann::json Engine::info() const {
  nlohmann::json extractors = nlohmann::json::array();
  nlohmann::json indices = nlohmann::json::object();
  for (Modality m : kAllModalities) {
    extractors.push_back(to_json(extractor_->descriptor(m)));
    if (const ModalityIndex* mi = data_->modality(m); mi && mi->index) {
      indices[std::string(to_string(m))] = {{"kind", to_string(mi->index->kind())},
                                            {"size", mi->index->size()}};
    }
  }
  const SamplingConfig& s = data_->catalog.sampling;
  return {{"role", "node"},
          {"shard", config_.shard_name},
          {"media_count", data_->catalog.items.size()},
          {"sampling", {{"fps", s.frame_rate_fps}, {"window_sec", s.window_sec}, {"overlap_sec", s.overlap_sec}}},
          {"extractors", std::move(extractors)},
          {"indices", std::move(indices)}};
}

}  // namespace avsearch

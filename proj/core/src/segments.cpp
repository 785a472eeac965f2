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

#include <algorithm>
#include <cctype>
#include <map>

#include "avsearch/query_engine.hpp"
#include "avsearch/text.hpp"

namespace avsearch {

namespace {

// Absorbs rounding in k / fps timestamps.
constexpr double kTimeSlack = 1e-9;

template <typename T>
std::vector<T> filter_by_media(std::vector<T> hits, std::span<const MetadataFilter> filters,
                               const Catalog& catalog) {
  if (filters.empty()) return hits;
  std::erase_if(hits, [&](const T& h) {
    const MediaItem* item = catalog.find(h.media_id);
    return item == nullptr || !matches_filters(item->metadata, filters);
  });
  return hits;
}

}  // namespace

bool ranks_before(const Hit& a, const Hit& b) noexcept {
  if (a.score != b.score) return a.score > b.score;
  if (a.media_id != b.media_id) return a.media_id < b.media_id;
  return a.t_start.value_or(0.0) < b.t_start.value_or(0.0);
}

bool ranks_before(const SegmentHit& a, const SegmentHit& b) noexcept {
  if (a.score != b.score) return a.score > b.score;
  if (a.media_id != b.media_id) return a.media_id < b.media_id;
  return a.t_start < b.t_start;
}

void rank_and_truncate(std::vector<Hit>& hits, std::size_t topk) {
  std::stable_sort(hits.begin(), hits.end(),
                   [](const Hit& a, const Hit& b) { return ranks_before(a, b); });
  if (hits.size() > topk) hits.resize(topk);
}

void rank_and_truncate(std::vector<SegmentHit>& hits, std::size_t topk) {
  std::stable_sort(hits.begin(), hits.end(),
                   [](const SegmentHit& a, const SegmentHit& b) { return ranks_before(a, b); });
  if (hits.size() > topk) hits.resize(topk);
}

std::vector<SegmentHit> merge_to_segments(std::span<const Hit> hits, double gap_sec) {
  std::vector<const Hit*> timed;
  for (const Hit& h : hits) {
    if (h.t_start) timed.push_back(&h);
  }
  std::sort(timed.begin(), timed.end(), [](const Hit* a, const Hit* b) {
    if (a->media_id != b->media_id) return a->media_id < b->media_id;
    return *a->t_start < *b->t_start;
  });

  std::vector<SegmentHit> out;
  double last_start = 0.0;
  for (const Hit* h : timed) {
    const double start = *h->t_start;
    const double end = std::max(start, h->t_end.value_or(start));
    if (!out.empty()) {
      SegmentHit& seg = out.back();
      if (seg.media_id == h->media_id &&
          (start - last_start <= gap_sec + kTimeSlack || start < seg.t_end)) {
        seg.t_end = std::max(seg.t_end, end);
        seg.score = std::max(seg.score, h->score);
        ++seg.support;
        last_start = start;
        continue;
      }
    }
    out.push_back({h->media_id, start, end, h->score, 1});
    last_start = start;
  }
  return out;
}

std::vector<SegmentHit> intersect_segments(std::span<const SegmentHit> a,
                                           std::span<const SegmentHit> b) {
  std::map<MediaId, std::vector<const SegmentHit*>> by_media;
  for (const SegmentHit& s : b) by_media[s.media_id].push_back(&s);
  std::vector<SegmentHit> out;
  for (const SegmentHit& x : a) {
    auto it = by_media.find(x.media_id);
    if (it == by_media.end()) continue;
    for (const SegmentHit* y : it->second) {
      const double start = std::max(x.t_start, y->t_start);
      const double end = std::min(x.t_end, y->t_end);
      if (start < end) {
        out.push_back({x.media_id, start, end, std::min(x.score, y->score),
                       std::min(x.support, y->support)});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const SegmentHit& p, const SegmentHit& q) {
    return p.media_id < q.media_id || (p.media_id == q.media_id && p.t_start < q.t_start);
  });
  return out;
}

bool matches_filters(const Metadata& metadata, std::span<const MetadataFilter> filters) {
  for (const MetadataFilter& f : filters) {
    auto it = metadata.find(f.field);
    if (it == metadata.end() || tokenize(it->second) != tokenize(f.value)) return false;
  }
  return true;
}

std::vector<Hit> apply_metadata_filter(std::vector<Hit> hits,
                                       std::span<const MetadataFilter> filters,
                                       const Catalog& catalog) {
  return filter_by_media(std::move(hits), filters, catalog);
}

std::vector<SegmentHit> apply_metadata_filter(std::vector<SegmentHit> hits,
                                              std::span<const MetadataFilter> filters,
                                              const Catalog& catalog) {
  return filter_by_media(std::move(hits), filters, catalog);
}

Embedding compose_query_embedding(const Embedding& image, const Embedding& text, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in [0, 1]");
  }
  if (image.dim() != text.dim()) {
    throw Error(ErrorCode::kInvalidArgument, "image and text embeddings differ in dimension");
  }
  if (alpha == 0.0) return image;
  if (alpha == 1.0) return text;
  std::vector<float> mixed(image.dim());
  for (std::size_t i = 0; i < mixed.size(); ++i) {
    mixed[i] = static_cast<float>(alpha * text.values()[i] + (1.0 - alpha) * image.values()[i]);
  }
  try {
    return Embedding::from_raw(std::move(mixed));
  } catch (const Error&) {
    throw Error(ErrorCode::kInvalidArgument, "composed query embedding is zero");
  }
}

ParsedQueryText parse_query_text(std::string_view query) {
  ParsedQueryText out;
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  auto is_field_char = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-' || c == '.';
  };
  std::size_t i = 0;
  while (i < query.size()) {
    while (i < query.size() && is_space(query[i])) ++i;
    if (i >= query.size()) break;
    const std::size_t start = i;
    std::size_t j = i;
    while (j < query.size() && is_field_char(query[j])) ++j;
    if (j > start && j + 1 < query.size() && query[j] == ':' && !is_space(query[j + 1])) {
      std::string field(query.substr(start, j - start));
      std::size_t k = j + 1;
      std::string value;
      if (query[k] == '"') {
        std::size_t close = query.find('"', k + 1);
        if (close == std::string_view::npos) close = query.size();
        value = std::string(query.substr(k + 1, close - k - 1));
        i = std::min(query.size(), close + 1);
      } else {
        std::size_t e = k;
        while (e < query.size() && !is_space(query[e])) ++e;
        value = std::string(query.substr(k, e - k));
        i = e;
      }
      out.fields.push_back({std::move(field), std::move(value)});
      continue;
    }
    while (j < query.size() && !is_space(query[j])) ++j;
    if (!out.text.empty()) out.text += ' ';
    out.text += query.substr(start, j - start);
    i = j;
  }
  return out;
}

}  // namespace avsearch

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

#include "avsearch/extract.hpp"
#include "avsearch/text.hpp"

#include "internal.hpp"

namespace avsearch {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Scene, region and audio share the text space; faces get their own.
std::uint64_t space_salt(Modality modality) {
  return modality == Modality::kFace ? 0xface1d0000000001ULL : 0x7e47000000000001ULL;
}

std::string join_active(const std::vector<TimedText>& entries, double t) {
  std::string out;
  for (const TimedText& e : entries) {
    if (e.active_at(t)) {
      if (!out.empty()) out.push_back(' ');
      out += e.text;
    }
  }
  return out;
}

}  // namespace

ReferenceExtractor::ReferenceExtractor(ReferenceExtractorOptions options)
    : options_(options) {
  if (options_.dim == 0) throw Error(ErrorCode::kConfig, "reference extractor dim must be > 0");
}

ExtractorDescriptor ReferenceExtractor::descriptor(Modality modality) const {
  return ExtractorDescriptor{std::string(kName), modality, options_.dim,
                             std::string(kVersion)};
}

std::uint32_t ReferenceExtractor::bucket(Modality modality, std::string_view token) const {
  std::uint64_t h = detail::splitmix64(fnv1a(token) ^ options_.seed ^ space_salt(modality));
  return static_cast<std::uint32_t>(h % options_.dim);
}

std::optional<Embedding> ReferenceExtractor::embed_tokens(Modality modality,
                                                          std::string_view text) const {
  auto tokens = tokenize(text);
  if (tokens.empty()) return std::nullopt;
  std::vector<float> raw(options_.dim, 0.0f);
  for (const std::string& token : tokens) raw[bucket(modality, token)] += 1.0f;
  return Embedding::from_raw(std::move(raw));
}

Embedding ReferenceExtractor::embed_text(Modality modality, std::string_view text) const {
  auto e = embed_tokens(modality, text);
  if (!e) throw Error(ErrorCode::kEmptyQuery, "query text has no tokens");
  return std::move(*e);
}

const SyntheticMedia& ReferenceExtractor::require_synthetic(const MediaSource& source) const {
  if (source.synthetic == nullptr) {
    std::string what = source.item ? source.item->path.string() : std::string("<unknown>");
    throw Error(ErrorCode::kExtraction,
                "reference extractor only understands .wisedesc media: " + what);
  }
  return *source.synthetic;
}

Embedding ReferenceExtractor::embed_exemplar(Modality modality,
                                             const Exemplar& exemplar) const {
  if (exemplar.kind == PayloadKind::kText) return embed_text(modality, exemplar.bytes);

  SyntheticMedia media = parse_synthetic(exemplar.bytes);
  std::optional<Embedding> e;
  switch (modality) {
    case Modality::kScene:
      e = embed_tokens(modality, join_active(media.scene_text, 0.0));
      break;
    case Modality::kRegion:
      if (!media.objects.empty()) e = embed_tokens(modality, media.objects.front().label);
      break;
    case Modality::kFace:
      if (!media.faces.empty()) e = embed_tokens(modality, media.faces.front().identity);
      break;
    case Modality::kAudio: {
      std::string all;
      for (const TimedText& t : media.audio_text) all += t.text + " ";
      e = embed_tokens(modality, all);
      break;
    }
  }
  if (!e) {
    throw Error(ErrorCode::kEmptyQuery,
                "exemplar has nothing to embed for modality " + std::string(to_string(modality)));
  }
  return std::move(*e);
}

std::vector<std::optional<Embedding>> ReferenceExtractor::embed_frames(
    const MediaSource& source, std::span<const Frame> frames) const {
  const SyntheticMedia& media = require_synthetic(source);
  std::vector<std::optional<Embedding>> out;
  out.reserve(frames.size());
  for (const Frame& f : frames) {
    out.push_back(embed_tokens(Modality::kScene, join_active(media.scene_text, f.timestamp_sec)));
  }
  return out;
}

std::vector<std::vector<RegionDetection>> ReferenceExtractor::detect_regions(
    const MediaSource& source, std::span<const Frame> frames) const {
  const SyntheticMedia& media = require_synthetic(source);
  std::vector<std::vector<RegionDetection>> out(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    for (const ObjectTrack& o : media.objects) {
      if (o.start_sec <= frames[i].timestamp_sec && frames[i].timestamp_sec < o.end_sec) {
        auto e = embed_tokens(Modality::kRegion, o.label);
        if (e) out[i].push_back(RegionDetection{o.bbox, o.score, std::move(*e)});
      }
    }
  }
  return out;
}

std::vector<std::vector<RegionDetection>> ReferenceExtractor::detect_faces(
    const MediaSource& source, std::span<const Frame> frames) const {
  const SyntheticMedia& media = require_synthetic(source);
  std::vector<std::vector<RegionDetection>> out(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    for (const FaceTrack& f : media.faces) {
      if (f.start_sec <= frames[i].timestamp_sec && frames[i].timestamp_sec < f.end_sec) {
        auto e = embed_tokens(Modality::kFace, f.identity);
        if (e) out[i].push_back(RegionDetection{f.bbox, f.score, std::move(*e)});
      }
    }
  }
  return out;
}

std::vector<std::optional<Embedding>> ReferenceExtractor::embed_audio_windows(
    const MediaSource& source, std::span<const AudioWindow> windows) const {
  const SyntheticMedia& media = require_synthetic(source);
  std::vector<std::optional<Embedding>> out;
  out.reserve(windows.size());
  for (const AudioWindow& w : windows) {
    std::string text;
    for (const TimedText& t : media.audio_text) {
      if (t.overlaps(w.start_sec, w.end_sec)) {
        if (!text.empty()) text.push_back(' ');
        text += t.text;
      }
    }
    out.push_back(embed_tokens(Modality::kAudio, text));
  }
  return out;
}

std::vector<TranscriptSegment> ReferenceExtractor::transcribe(const MediaSource& source) const {
  const SyntheticMedia& media = require_synthetic(source);
  std::vector<TranscriptSegment> segments;
  for (const TimedText& t : media.transcript) {
    segments.push_back(TranscriptSegment{t.start_sec, t.end_sec, t.text});
  }
  return validate_transcript(std::move(segments));
}

}  // namespace avsearch

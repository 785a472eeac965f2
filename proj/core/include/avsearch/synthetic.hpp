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
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "avsearch/common.hpp"
#include "avsearch/media.hpp"

namespace avsearch {

// A `.wisedesc` document describes a piece of media by its content rather
// than its pixels or samples. The loader treats it as first-class media and
// the reference extractor embeds its text fields. Every range is half-open,
// [start_sec, end_sec); an omitted end means "until the end of the media".
//
//   {
//     "kind": "video",
//     "duration_sec": 12.0,
//     "has_audio": true,
//     "scene_text": [{"start": 0, "end": 6, "text": "a horse in a field"}],
//     "audio_text": [{"start": 2, "end": 4, "text": "gunshot"}],
//     "objects": [{"label": "hat", "bbox": [0.1, 0.1, 0.3, 0.4],
//                  "start": 0, "end": 3, "score": 0.9}],
//     "faces": [{"identity": "actor-17", "bbox": [0.4, 0.2, 0.6, 0.5],
//                "start": 1, "end": 5}],
//     "transcript": [{"start": 7.5, "end": 9.0, "text": "wait what"}],
//     "metadata": {"title": "...", "country": "Germany"}
//   }

inline constexpr double kOpenEnd = std::numeric_limits<double>::infinity();

struct TimedText {
  double start_sec = 0.0;
  double end_sec = kOpenEnd;
  std::string text;

  bool active_at(double t) const noexcept {
    return start_sec <= t && t < end_sec;
  }
  bool overlaps(double begin, double end) const noexcept {
    return start_sec < end && begin < end_sec;
  }
  friend bool operator==(const TimedText&, const TimedText&) = default;
};

struct ObjectTrack {
  std::string label;
  BoundingBox bbox;
  double start_sec = 0.0;
  double end_sec = kOpenEnd;
  float score = 1.0f;

  friend bool operator==(const ObjectTrack&, const ObjectTrack&) = default;
};

struct FaceTrack {
  std::string identity;
  BoundingBox bbox;
  double start_sec = 0.0;
  double end_sec = kOpenEnd;
  float score = 1.0f;

  friend bool operator==(const FaceTrack&, const FaceTrack&) = default;
};

struct SyntheticMedia {
  MediaKind kind = MediaKind::kImage;
  double duration_sec = 0.0;
  bool has_audio = false;
  std::vector<TimedText> scene_text;
  std::vector<TimedText> audio_text;
  std::vector<ObjectTrack> objects;
  std::vector<FaceTrack> faces;
  std::vector<TimedText> transcript;
  Metadata metadata;

  friend bool operator==(const SyntheticMedia&, const SyntheticMedia&) =
      default;
};

inline constexpr std::string_view kSyntheticExtension = ".wisedesc";

SyntheticMedia parse_synthetic(std::string_view json_text);
std::string dump_synthetic(const SyntheticMedia& media);
SyntheticMedia load_synthetic(const std::filesystem::path& path);
void save_synthetic(const SyntheticMedia& media,
                    const std::filesystem::path& path);

}  // namespace avsearch

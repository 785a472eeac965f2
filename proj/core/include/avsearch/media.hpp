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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "avsearch/common.hpp"

namespace avsearch {

enum class MediaKind : std::uint8_t { kImage, kVideo, kAudio };

std::string_view to_string(MediaKind kind);
std::optional<MediaKind> parse_media_kind(std::string_view name);

using Metadata = std::map<std::string, std::string>;

struct MediaItem {
  MediaId id = 0;
  MediaKind kind = MediaKind::kImage;
  std::filesystem::path path;
  double duration_sec = 0.0;  // 0 for images
  bool has_audio = false;
  Metadata metadata;
  // File stamp used to skip unchanged media on re-index.
  std::uintmax_t size_bytes = 0;
  std::int64_t mtime_ns = 0;

  friend bool operator==(const MediaItem&, const MediaItem&) = default;
};

struct Frame {
  MediaId media_id = 0;
  double timestamp_sec = 0.0;

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct AudioWindow {
  MediaId media_id = 0;
  double start_sec = 0.0;
  double end_sec = 0.0;

  friend bool operator==(const AudioWindow&, const AudioWindow&) = default;
};

struct SamplingConfig {
  double frame_rate_fps = 2.0;
  double window_sec = 4.0;
  double overlap_sec = 2.0;

  double hop_sec() const noexcept { return window_sec - overlap_sec; }
  double frame_interval_sec() const noexcept { return 1.0 / frame_rate_fps; }

  // Throws Error(kConfig) unless fps > 0, W > 0 and 0 <= V < W.
  void validate() const;

  friend bool operator==(const SamplingConfig&, const SamplingConfig&) =
      default;
};

}  // namespace avsearch

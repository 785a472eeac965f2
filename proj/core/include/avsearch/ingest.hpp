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

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "avsearch/media.hpp"

namespace avsearch {

struct ScanWarning {
  std::filesystem::path path;
  std::string reason;

  friend bool operator==(const ScanWarning&, const ScanWarning&) = default;
};

struct ScanResult {
  std::vector<MediaItem> items;  // sorted by path, ids assigned 1..n
  std::vector<ScanWarning> warnings;
};

// Result of looking inside a media container without decoding it.
struct ProbeResult {
  MediaKind kind = MediaKind::kImage;
  double duration_sec = 0.0;
  bool has_audio = false;
  Metadata metadata;
};

/// Media kind implied by the extension allowlist, or nullopt when the file is
/// not media we know how to ingest. `.wisedesc` returns nullopt here because
/// its kind lives inside the document.
std::optional<MediaKind> kind_from_extension(const std::filesystem::path& path);

bool is_ingestable(const std::filesystem::path& path);

/// Reads container headers for duration and audio presence. Supports
/// `.wisedesc`, WAV, FLAC, MP4/MOV and still images; other containers in the
/// allowlist throw Error(kFormat). Metadata is read from a `<file>.meta.json`
/// sidecar when one exists.
ProbeResult probe_media(const std::filesystem::path& path);

/// Recursively discovers ingestable files under `root`, sorted by path.
/// Files that cannot be probed are skipped with a warning; an unreadable
/// root throws Error(kIo). Probing fans out over `workers` threads but the
/// output never depends on the worker count.
ScanResult scan_media(const std::filesystem::path& root,
                      std::size_t workers = 1);

/// Frames at t_k = k / fps while t_k < duration; images yield a single frame
/// at t = 0. Throws Error(kInvalidKind) for audio items.
std::vector<Frame> sample_frames(const MediaItem& item,
                                 const SamplingConfig& config);

/// Windows [s, min(s + W, D)] for s = 0, H, 2H, ... while s < D. The first
/// window is always kept; later ones only when at least H long. Items without
/// an audio track yield no windows.
std::vector<AudioWindow> sample_audio_windows(const MediaItem& item,
                                              const SamplingConfig& config);

struct Catalog {
  SamplingConfig sampling;
  std::vector<MediaItem> items;
  std::vector<Frame> frames;
  std::vector<AudioWindow> windows;

  const MediaItem* find(MediaId id) const;
  MediaId next_id() const;

  friend bool operator==(const Catalog&, const Catalog&) = default;
};

inline constexpr int kCatalogFormatVersion = 1;

void persist_catalog(const Catalog& catalog, const std::filesystem::path& path);
Catalog load_catalog(const std::filesystem::path& path);

}  // namespace avsearch

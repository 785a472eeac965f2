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

#include "avsearch/ingest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>
#include <system_error>
#include <thread>

#include <nlohmann/json.hpp>

namespace avsearch {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(MediaKind kind) {
  switch (kind) {
    case MediaKind::kImage:
      return "image";
    case MediaKind::kVideo:
      return "video";
    case MediaKind::kAudio:
      return "audio";
  }
  return "image";
}

std::optional<MediaKind> parse_media_kind(std::string_view name) {
  if (name == "image") return MediaKind::kImage;
  if (name == "video") return MediaKind::kVideo;
  if (name == "audio") return MediaKind::kAudio;
  return std::nullopt;
}

void SamplingConfig::validate() const {
  if (!(frame_rate_fps > 0.0) || !std::isfinite(frame_rate_fps)) {
    throw Error(ErrorCode::kConfig, "frame_rate_fps must be positive");
  }
  if (!(window_sec > 0.0) || !std::isfinite(window_sec)) {
    throw Error(ErrorCode::kConfig, "window_sec must be positive");
  }
  if (!(overlap_sec >= 0.0) || !(overlap_sec < window_sec)) {
    throw Error(ErrorCode::kConfig, "overlap_sec must satisfy 0 <= V < W");
  }
}

namespace {

struct ProbeOutcome {
  std::optional<MediaItem> item;
  std::optional<ScanWarning> warning;
};

ProbeOutcome probe_one(const fs::path& path) {
  ProbeOutcome outcome;
  try {
    ProbeResult probe = probe_media(path);
    MediaItem item;
    item.kind = probe.kind;
    item.path = path;
    item.duration_sec = probe.duration_sec;
    item.has_audio = probe.has_audio;
    item.metadata = std::move(probe.metadata);
    item.size_bytes = fs::file_size(path);
    item.mtime_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                        fs::last_write_time(path).time_since_epoch())
                        .count();
    if (item.kind != MediaKind::kImage && !(item.duration_sec > 0.0)) {
      outcome.warning = ScanWarning{path, "zero duration"};
    } else {
      outcome.item = std::move(item);
    }
  } catch (const std::exception& e) {
    outcome.warning = ScanWarning{path, e.what()};
  }
  return outcome;
}

}  // namespace

ScanResult scan_media(const fs::path& root, std::size_t workers) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorCode::kIo, "media root is not a readable directory: " +
                                    root.string());
  }

  ScanResult result;
  std::vector<fs::path> candidates;
  fs::recursive_directory_iterator it(
      root, fs::directory_options::skip_permission_denied, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot read " + root.string() + ": " + ec.message());
  for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) break;
    if (!it->is_regular_file(ec)) continue;
    const fs::path& p = it->path();
    if (is_ingestable(p)) {
      candidates.push_back(p);
    } else if (p.filename().string().find(".meta.json") == std::string::npos) {
      result.warnings.push_back({p, "unsupported extension"});
    }
  }
  std::sort(candidates.begin(), candidates.end());

  std::vector<ProbeOutcome> outcomes(candidates.size());
  workers = std::max<std::size_t>(1, std::min(workers, candidates.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      outcomes[i] = probe_one(candidates[i]);
    }
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < candidates.size(); i += workers) {
          outcomes[i] = probe_one(candidates[i]);
        }
      });
    }
  }

  MediaId next = 1;
  for (ProbeOutcome& o : outcomes) {
    if (o.item) {
      o.item->id = next++;
      result.items.push_back(std::move(*o.item));
    }
    if (o.warning) result.warnings.push_back(std::move(*o.warning));
  }
  std::sort(result.warnings.begin(), result.warnings.end(),
            [](const ScanWarning& a, const ScanWarning& b) { return a.path < b.path; });
  return result;
}

std::vector<Frame> sample_frames(const MediaItem& item,
                                 const SamplingConfig& config) {
  if (item.kind == MediaKind::kAudio) {
    throw Error(ErrorCode::kInvalidKind,
                "cannot sample frames from audio item " + item.path.string());
  }
  config.validate();
  if (item.kind == MediaKind::kImage) return {Frame{item.id, 0.0}};

  std::vector<Frame> frames;
  for (std::uint64_t k = 0;; ++k) {
    double t = static_cast<double>(k) / config.frame_rate_fps;
    if (!(t < item.duration_sec)) break;
    frames.push_back(Frame{item.id, t});
  }
  return frames;
}

std::vector<AudioWindow> sample_audio_windows(const MediaItem& item,
                                              const SamplingConfig& config) {
  if (item.kind == MediaKind::kImage) {
    throw Error(ErrorCode::kInvalidKind,
                "cannot sample audio from image item " + item.path.string());
  }
  config.validate();
  std::vector<AudioWindow> windows;
  if (!item.has_audio) return windows;

  const double hop = config.hop_sec();
  // Absorbs representation error in k * H so that a tail exactly H long
  // is not dropped.
  const double slack = 1e-9 * std::max(1.0, item.duration_sec);
  for (std::uint64_t k = 0;; ++k) {
    double start = static_cast<double>(k) * hop;
    if (!(start < item.duration_sec)) break;
    double end = std::min(start + config.window_sec, item.duration_sec);
    if (k == 0 || end - start + slack >= hop) {
      windows.push_back(AudioWindow{item.id, start, end});
    }
  }
  return windows;
}

const MediaItem* Catalog::find(MediaId id) const {
  auto it = std::lower_bound(
      items.begin(), items.end(), id,
      [](const MediaItem& item, MediaId key) { return item.id < key; });
  if (it != items.end() && it->id == id) return &*it;
  // Items are kept sorted by id; fall back to a scan for hand-built catalogs.
  for (const MediaItem& item : items) {
    if (item.id == id) return &item;
  }
  return nullptr;
}

MediaId Catalog::next_id() const {
  MediaId max_id = 0;
  for (const MediaItem& item : items) max_id = std::max(max_id, item.id);
  return max_id + 1;
}

void persist_catalog(const Catalog& catalog, const fs::path& path) {
  json doc;
  doc["format"] = "avsearch-catalog";
  doc["version"] = kCatalogFormatVersion;
  doc["sampling"] = {{"frame_rate_fps", catalog.sampling.frame_rate_fps},
                     {"window_sec", catalog.sampling.window_sec},
                     {"overlap_sec", catalog.sampling.overlap_sec}};
  json items = json::array();
  for (const MediaItem& item : catalog.items) {
    items.push_back({{"id", item.id},
                     {"kind", std::string(to_string(item.kind))},
                     {"path", item.path.string()},
                     {"duration_sec", item.duration_sec},
                     {"has_audio", item.has_audio},
                     {"metadata", item.metadata},
                     {"size_bytes", item.size_bytes},
                     {"mtime_ns", item.mtime_ns}});
  }
  doc["items"] = std::move(items);
  json frames = json::array();
  for (const Frame& f : catalog.frames) {
    frames.push_back(json::array({f.media_id, f.timestamp_sec}));
  }
  doc["frames"] = std::move(frames);
  json windows = json::array();
  for (const AudioWindow& w : catalog.windows) {
    windows.push_back(json::array({w.media_id, w.start_sec, w.end_sec}));
  }
  doc["windows"] = std::move(windows);

  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out << doc.dump();
    if (!out) throw Error(ErrorCode::kIo, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot publish " + path.string() + ": " + ec.message());
}

Catalog load_catalog(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open catalog " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();

  Catalog catalog;
  try {
    json doc = json::parse(buffer.str());
    if (doc.at("format") != "avsearch-catalog") {
      throw Error(ErrorCode::kFormat, path.string() + " is not a catalog");
    }
    if (doc.at("version").get<int>() != kCatalogFormatVersion) {
      throw Error(ErrorCode::kFormat, "unsupported catalog version in " + path.string());
    }
    const json& s = doc.at("sampling");
    catalog.sampling.frame_rate_fps = s.at("frame_rate_fps").get<double>();
    catalog.sampling.window_sec = s.at("window_sec").get<double>();
    catalog.sampling.overlap_sec = s.at("overlap_sec").get<double>();
    for (const json& j : doc.at("items")) {
      MediaItem item;
      item.id = j.at("id").get<MediaId>();
      auto kind = parse_media_kind(j.at("kind").get<std::string>());
      if (!kind) throw Error(ErrorCode::kFormat, "bad media kind in catalog");
      item.kind = *kind;
      item.path = j.at("path").get<std::string>();
      item.duration_sec = j.at("duration_sec").get<double>();
      item.has_audio = j.at("has_audio").get<bool>();
      item.metadata = j.at("metadata").get<Metadata>();
      item.size_bytes = j.at("size_bytes").get<std::uintmax_t>();
      item.mtime_ns = j.at("mtime_ns").get<std::int64_t>();
      catalog.items.push_back(std::move(item));
    }
    for (const json& j : doc.at("frames")) {
      catalog.frames.push_back(Frame{j.at(0).get<MediaId>(), j.at(1).get<double>()});
    }
    for (const json& j : doc.at("windows")) {
      catalog.windows.push_back(AudioWindow{
          j.at(0).get<MediaId>(), j.at(1).get<double>(), j.at(2).get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, "corrupt catalog " + path.string() + ": " + e.what());
  }
  return catalog;
}

}  // namespace avsearch

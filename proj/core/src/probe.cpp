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
#include <array>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "avsearch/ingest.hpp"
#include "avsearch/synthetic.hpp"

namespace avsearch {

namespace fs = std::filesystem;

namespace {

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

std::vector<unsigned char> read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const unsigned char* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
         (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

std::uint64_t be64(const unsigned char* p) {
  return (std::uint64_t{be32(p)} << 32) | be32(p + 4);
}

std::uint32_t le32(const unsigned char* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
         (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
}

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

[[noreturn]] void bad(const fs::path& path, const std::string& why) {
  throw Error(ErrorCode::kFormat, path.string() + ": " + why);
}

ProbeResult probe_wav(const fs::path& path) {
  auto bytes = read_all(path);
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    bad(path, "not a RIFF/WAVE file");
  }
  std::uint32_t byte_rate = 0;
  std::uint64_t data_size = 0;
  bool have_data = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    std::uint32_t size = le32(bytes.data() + pos + 4);
    const unsigned char* body = bytes.data() + pos + 8;
    if (std::memcmp(bytes.data() + pos, "fmt ", 4) == 0 && size >= 16 &&
        pos + 8 + 16 <= bytes.size()) {
      byte_rate = le32(body + 8);
    } else if (std::memcmp(bytes.data() + pos, "data", 4) == 0) {
      data_size = std::min<std::uint64_t>(size, bytes.size() - (pos + 8));
      have_data = true;
    }
    pos += 8 + size + (size & 1u);
  }
  if (byte_rate == 0 || !have_data) bad(path, "missing fmt or data chunk");
  ProbeResult r;
  r.kind = MediaKind::kAudio;
  r.duration_sec = static_cast<double>(data_size) / byte_rate;
  r.has_audio = true;
  return r;
}

ProbeResult probe_flac(const fs::path& path) {
  auto bytes = read_all(path);
  // "fLaC", 4-byte block header, then STREAMINFO.
  if (bytes.size() < 8 + 34 || std::memcmp(bytes.data(), "fLaC", 4) != 0 ||
      (bytes[4] & 0x7f) != 0) {
    bad(path, "missing FLAC STREAMINFO");
  }
  const unsigned char* si = bytes.data() + 8;
  std::uint32_t sample_rate = (std::uint32_t{si[10]} << 12) |
                              (std::uint32_t{si[11]} << 4) | (si[12] >> 4);
  std::uint64_t total = (std::uint64_t{si[13]} & 0x0f) << 32 | be32(si + 14);
  if (sample_rate == 0) bad(path, "zero sample rate");
  ProbeResult r;
  r.kind = MediaKind::kAudio;
  r.duration_sec = static_cast<double>(total) / sample_rate;
  r.has_audio = true;
  return r;
}

// Walks ISO-BMFF boxes looking for moov/mvhd, and for an `hdlr` of type
// `soun` anywhere inside moov to decide whether there is an audio track.
ProbeResult probe_mp4(const fs::path& path) {
  auto bytes = read_all(path);
  std::size_t pos = 0;
  while (pos + 8 <= bytes.size()) {
    std::uint64_t size = be32(bytes.data() + pos);
    std::size_t header = 8;
    if (size == 1 && pos + 16 <= bytes.size()) {
      size = be64(bytes.data() + pos + 8);
      header = 16;
    } else if (size == 0) {
      size = bytes.size() - pos;
    }
    if (size < header || pos + size > bytes.size()) break;
    if (std::memcmp(bytes.data() + pos + 4, "moov", 4) == 0) {
      const unsigned char* moov = bytes.data() + pos + header;
      std::size_t moov_len = size - header;
      ProbeResult r;
      r.kind = MediaKind::kVideo;
      bool found = false;
      for (std::size_t i = 0; i + 4 <= moov_len; ++i) {
        if (!found && std::memcmp(moov + i, "mvhd", 4) == 0 && i + 4 + 28 <= moov_len) {
          const unsigned char* b = moov + i + 4;
          std::uint32_t timescale;
          std::uint64_t duration;
          if (b[0] == 1) {
            timescale = be32(b + 20);
            duration = be64(b + 24);
          } else {
            timescale = be32(b + 12);
            duration = be32(b + 16);
          }
          if (timescale == 0) bad(path, "zero timescale");
          r.duration_sec = static_cast<double>(duration) / timescale;
          found = true;
        }
        if (std::memcmp(moov + i, "hdlr", 4) == 0 && i + 16 <= moov_len &&
            std::memcmp(moov + i + 12, "soun", 4) == 0) {
          r.has_audio = true;
        }
      }
      if (!found) bad(path, "moov without mvhd");
      return r;
    }
    pos += size;
  }
  bad(path, "no moov box");
}

Metadata read_sidecar_metadata(const fs::path& path) {
  fs::path sidecar = path;
  sidecar += ".meta.json";
  Metadata metadata;
  std::error_code ec;
  if (!fs::exists(sidecar, ec)) return metadata;
  std::ifstream in(sidecar);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    auto doc = nlohmann::json::parse(buffer.str());
    for (const auto& [k, v] : doc.items()) {
      metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
  } catch (const nlohmann::json::exception& e) {
    bad(sidecar, e.what());
  }
  return metadata;
}

}  // namespace

std::optional<MediaKind> kind_from_extension(const fs::path& path) {
  static constexpr std::array<std::string_view, 4> kImage = {".jpg", ".jpeg", ".png", ".webp"};
  static constexpr std::array<std::string_view, 4> kVideo = {".mp4", ".mkv", ".webm", ".mov"};
  static constexpr std::array<std::string_view, 4> kAudio = {".mp3", ".wav", ".flac", ".ogg"};
  std::string ext = lower_extension(path);
  auto in = [&](const auto& list) {
    return std::find(list.begin(), list.end(), ext) != list.end();
  };
  if (in(kImage)) return MediaKind::kImage;
  if (in(kVideo)) return MediaKind::kVideo;
  if (in(kAudio)) return MediaKind::kAudio;
  return std::nullopt;
}

bool is_ingestable(const fs::path& path) {
  return kind_from_extension(path).has_value() ||
         lower_extension(path) == kSyntheticExtension;
}

ProbeResult probe_media(const fs::path& path) {
  std::string ext = lower_extension(path);
  if (ext == kSyntheticExtension) {
    SyntheticMedia media = load_synthetic(path);
    ProbeResult r;
    r.kind = media.kind;
    r.duration_sec = media.duration_sec;
    r.has_audio = media.has_audio;
    r.metadata = std::move(media.metadata);
    return r;
  }
  auto kind = kind_from_extension(path);
  if (!kind) bad(path, "unsupported extension");

  ProbeResult r;
  if (*kind == MediaKind::kImage) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) throw Error(ErrorCode::kIo, "cannot read " + path.string());
    r.kind = MediaKind::kImage;
  } else if (ext == ".wav") {
    r = probe_wav(path);
  } else if (ext == ".flac") {
    r = probe_flac(path);
  } else if (ext == ".mp4" || ext == ".mov") {
    r = probe_mp4(path);
  } else {
    bad(path, "duration probing not supported for " + ext);
  }
  r.metadata = read_sidecar_metadata(path);
  return r;
}

}  // namespace avsearch

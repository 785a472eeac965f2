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

#include "avsearch/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace avsearch {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) {
  throw Error(ErrorCode::kFormat, "invalid .wisedesc document: " + what);
}

BoundingBox parse_bbox(const json& j) {
  if (!j.is_array() || j.size() != 4) fail("bbox must be [x0, y0, x1, y1]");
  BoundingBox box{j[0].get<float>(), j[1].get<float>(), j[2].get<float>(),
                  j[3].get<float>()};
  if (!box.valid()) fail("bbox must satisfy 0 <= x0 < x1 <= 1, 0 <= y0 < y1 <= 1");
  return box;
}

json dump_bbox(const BoundingBox& box) {
  return json::array({box.x0, box.y0, box.x1, box.y1});
}

void parse_range(const json& j, double& start, double& end) {
  start = j.value("start", 0.0);
  end = j.contains("end") ? j.at("end").get<double>() : kOpenEnd;
  if (!(start >= 0.0) || !(start < end)) fail("range needs 0 <= start < end");
}

void dump_range(json& j, double start, double end) {
  j["start"] = start;
  if (std::isfinite(end)) j["end"] = end;
}

std::vector<TimedText> parse_timed(const json& doc, const char* key,
                                   bool require_text) {
  std::vector<TimedText> out;
  if (!doc.contains(key)) return out;
  const json& arr = doc.at(key);
  if (!arr.is_array()) fail(std::string(key) + " must be an array");
  for (const json& e : arr) {
    TimedText t;
    parse_range(e, t.start_sec, t.end_sec);
    t.text = e.at("text").get<std::string>();
    if (require_text && t.text.empty()) fail(std::string(key) + " entry with empty text");
    out.push_back(std::move(t));
  }
  return out;
}

json dump_timed(const std::vector<TimedText>& items) {
  json arr = json::array();
  for (const TimedText& t : items) {
    json e;
    dump_range(e, t.start_sec, t.end_sec);
    e["text"] = t.text;
    arr.push_back(std::move(e));
  }
  return arr;
}

}  // namespace

SyntheticMedia parse_synthetic(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(e.what());
  }
  if (!doc.is_object()) fail("top level must be an object");

  SyntheticMedia media;
  try {
    auto kind = parse_media_kind(doc.at("kind").get<std::string>());
    if (!kind) fail("unknown kind");
    media.kind = *kind;
    media.duration_sec = doc.value("duration_sec", 0.0);
    if (media.kind == MediaKind::kImage) {
      media.duration_sec = 0.0;
    } else if (!(media.duration_sec > 0.0)) {
      fail("video and audio need duration_sec > 0");
    }
    media.has_audio = doc.value("has_audio", media.kind != MediaKind::kImage);
    if (media.kind == MediaKind::kImage) media.has_audio = false;

    media.scene_text = parse_timed(doc, "scene_text", false);
    media.audio_text = parse_timed(doc, "audio_text", false);
    media.transcript = parse_timed(doc, "transcript", true);
    for (const TimedText& seg : media.transcript) {
      if (!std::isfinite(seg.end_sec)) fail("transcript segments need an end");
    }

    if (doc.contains("objects")) {
      for (const json& e : doc.at("objects")) {
        ObjectTrack o;
        o.label = e.at("label").get<std::string>();
        o.bbox = parse_bbox(e.at("bbox"));
        parse_range(e, o.start_sec, o.end_sec);
        o.score = e.value("score", 1.0f);
        media.objects.push_back(std::move(o));
      }
    }
    if (doc.contains("faces")) {
      for (const json& e : doc.at("faces")) {
        FaceTrack f;
        f.identity = e.at("identity").get<std::string>();
        if (f.identity.empty()) fail("face identity must be non-empty");
        f.bbox = parse_bbox(e.at("bbox"));
        parse_range(e, f.start_sec, f.end_sec);
        f.score = e.value("score", 1.0f);
        media.faces.push_back(std::move(f));
      }
    }
    if (doc.contains("metadata")) {
      for (const auto& [field, value] : doc.at("metadata").items()) {
        media.metadata[field] =
            value.is_string() ? value.get<std::string>() : value.dump();
      }
    }
  } catch (const json::exception& e) {
    fail(e.what());
  }
  return media;
}

std::string dump_synthetic(const SyntheticMedia& media) {
  json doc;
  doc["kind"] = std::string(to_string(media.kind));
  doc["duration_sec"] = media.duration_sec;
  doc["has_audio"] = media.has_audio;
  doc["scene_text"] = dump_timed(media.scene_text);
  doc["audio_text"] = dump_timed(media.audio_text);
  json objects = json::array();
  for (const ObjectTrack& o : media.objects) {
    json e{{"label", o.label}, {"bbox", dump_bbox(o.bbox)}, {"score", o.score}};
    dump_range(e, o.start_sec, o.end_sec);
    objects.push_back(std::move(e));
  }
  doc["objects"] = std::move(objects);
  json faces = json::array();
  for (const FaceTrack& f : media.faces) {
    json e{{"identity", f.identity}, {"bbox", dump_bbox(f.bbox)}, {"score", f.score}};
    dump_range(e, f.start_sec, f.end_sec);
    faces.push_back(std::move(e));
  }
  doc["faces"] = std::move(faces);
  doc["transcript"] = dump_timed(media.transcript);
  doc["metadata"] = media.metadata;
  return doc.dump(2);
}

SyntheticMedia load_synthetic(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_synthetic(buffer.str());
}

void save_synthetic(const SyntheticMedia& media,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << dump_synthetic(media);
}

}  // namespace avsearch

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

#include "avsearch/extract_protocol.hpp"

#include <cmath>

#include "avsearch/text.hpp"

namespace avsearch {

using nlohmann::json;

std::string_view to_string(ExtractTask task) {
  switch (task) {
    case ExtractTask::kEmbed:
      return "embed";
    case ExtractTask::kDetect:
      return "detect";
    case ExtractTask::kTranscribe:
      return "transcribe";
  }
  return "embed";
}

namespace {

ExtractTask parse_task(const std::string& name) {
  if (name == "embed") return ExtractTask::kEmbed;
  if (name == "detect") return ExtractTask::kDetect;
  if (name == "transcribe") return ExtractTask::kTranscribe;
  throw Error(ErrorCode::kFormat, "unknown extraction task '" + name + "'");
}

json embedding_json(const Embedding& e) {
  return json(std::vector<float>(e.values().begin(), e.values().end()));
}

// Unit vectors are kept bit-for-bit; anything else is normalized here.
Embedding embedding_from(const json& j) {
  auto values = j.get<std::vector<float>>();
  try {
    return Embedding::from_unit(values);
  } catch (const Error&) {
    return Embedding::from_raw(std::move(values));
  }
}

}  // namespace

json to_json(const ExtractorDescriptor& d) {
  return {{"name", d.name},
          {"version", d.version},
          {"modality", std::string(to_string(d.modality))},
          {"dim", d.dim}};
}

ExtractorDescriptor descriptor_from_json(const json& j) {
  ExtractorDescriptor d;
  d.name = j.at("name").get<std::string>();
  d.version = j.at("version").get<std::string>();
  auto m = parse_modality(j.at("modality").get<std::string>());
  if (!m) throw Error(ErrorCode::kFormat, "unknown modality in extractor descriptor");
  d.modality = *m;
  d.dim = j.at("dim").get<std::uint32_t>();
  return d;
}

json encode_extract_request(const ExtractorDescriptor& extractor,
                            std::span<const ExtractItem> items) {
  json arr = json::array();
  for (const ExtractItem& item : items) {
    json j{{"id", item.id},
           {"payload_kind", std::string(to_string(item.payload_kind))},
           {"task", std::string(to_string(item.task))}};
    j["payload"] = item.payload_kind == PayloadKind::kText ? item.payload
                                                           : base64_encode(item.payload);
    if (item.locator) {
      json loc{{"path", item.locator->path}, {"start", item.locator->start_sec}};
      if (item.locator->end_sec) loc["end"] = *item.locator->end_sec;
      j["locator"] = std::move(loc);
    }
    arr.push_back(std::move(j));
  }
  return {{"extractor", to_json(extractor)}, {"items", std::move(arr)}};
}

std::pair<ExtractorDescriptor, std::vector<ExtractItem>> decode_extract_request(
    const json& body) {
  try {
    ExtractorDescriptor d = descriptor_from_json(body.at("extractor"));
    std::vector<ExtractItem> items;
    for (const json& j : body.at("items")) {
      ExtractItem item;
      item.id = j.at("id").get<std::string>();
      auto kind = parse_payload_kind(j.at("payload_kind").get<std::string>());
      if (!kind) throw Error(ErrorCode::kFormat, "unknown payload_kind");
      item.payload_kind = *kind;
      std::string payload = j.value("payload", std::string());
      item.payload = item.payload_kind == PayloadKind::kText ? payload : base64_decode(payload);
      item.task = parse_task(j.value("task", std::string("embed")));
      if (j.contains("locator")) {
        const json& l = j.at("locator");
        MediaLocator loc;
        loc.path = l.value("path", std::string());
        loc.start_sec = l.value("start", 0.0);
        if (l.contains("end")) loc.end_sec = l.at("end").get<double>();
        item.locator = std::move(loc);
      }
      items.push_back(std::move(item));
    }
    return {std::move(d), std::move(items)};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("malformed extract request: ") + e.what());
  }
}

json encode_extract_results(std::span<const ExtractItemResult> results) {
  json arr = json::array();
  for (const ExtractItemResult& r : results) {
    json j{{"id", r.id}, {"ok", r.ok}};
    if (!r.ok) {
      j["error"] = r.error;
    } else {
      if (r.embedding) j["embedding"] = embedding_json(*r.embedding);
      if (r.regions) {
        json regions = json::array();
        for (const RegionDetection& d : *r.regions) {
          regions.push_back({{"bbox", {d.bbox.x0, d.bbox.y0, d.bbox.x1, d.bbox.y1}},
                             {"score", d.score},
                             {"embedding", embedding_json(d.embedding)}});
        }
        j["regions"] = std::move(regions);
      }
      if (r.segments) {
        json segs = json::array();
        for (const TranscriptSegment& s : *r.segments) {
          segs.push_back({{"start", s.start_sec}, {"end", s.end_sec}, {"text", s.text}});
        }
        j["segments"] = std::move(segs);
      }
    }
    arr.push_back(std::move(j));
  }
  return {{"results", std::move(arr)}};
}

std::vector<ExtractItemResult> decode_extract_results(const json& body) {
  std::vector<ExtractItemResult> out;
  try {
    for (const json& j : body.at("results")) {
      ExtractItemResult r;
      r.id = j.at("id").get<std::string>();
      r.ok = j.at("ok").get<bool>();
      if (!r.ok) {
        r.error = j.value("error", std::string("unspecified error"));
        out.push_back(std::move(r));
        continue;
      }
      try {
        if (j.contains("embedding") && !j.at("embedding").is_null()) {
          r.embedding = embedding_from(j.at("embedding"));
        }
        if (j.contains("regions")) {
          std::vector<RegionDetection> regions;
          for (const json& d : j.at("regions")) {
            const json& b = d.at("bbox");
            RegionDetection det;
            det.bbox = BoundingBox{b.at(0).get<float>(), b.at(1).get<float>(),
                                   b.at(2).get<float>(), b.at(3).get<float>()};
            det.score = d.at("score").get<float>();
            if (!det.bbox.valid() || !std::isfinite(det.score)) {
              throw Error(ErrorCode::kFormat, "invalid region detection");
            }
            det.embedding = embedding_from(d.at("embedding"));
            regions.push_back(std::move(det));
          }
          r.regions = std::move(regions);
        }
        if (j.contains("segments")) {
          std::vector<TranscriptSegment> segs;
          for (const json& s : j.at("segments")) {
            segs.push_back(TranscriptSegment{s.at("start").get<double>(),
                                             s.at("end").get<double>(),
                                             s.at("text").get<std::string>()});
          }
          r.segments = std::move(segs);
        }
      } catch (const Error& e) {
        r = ExtractItemResult{r.id, false, std::nullopt, std::nullopt, std::nullopt, e.what()};
      }
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("malformed extract response: ") + e.what());
  }
  return out;
}

std::vector<ExtractItemResult> serve_extract_items(const Extractor& extractor,
                                                   const ExtractorDescriptor& requested,
                                                   std::span<const ExtractItem> items) {
  require_compatible(extractor.descriptor(requested.modality), requested);
  const Modality modality = requested.modality;

  std::vector<ExtractItemResult> results;
  results.reserve(items.size());
  for (const ExtractItem& item : items) {
    ExtractItemResult r;
    r.id = item.id;
    try {
      if (item.payload_kind == PayloadKind::kText) {
        r.embedding = extractor.embed_text(modality, item.payload);
      } else if (!item.locator && item.task != ExtractTask::kTranscribe) {
        r.embedding = extractor.embed_exemplar(modality, Exemplar{item.payload_kind, item.payload});
      } else {
        std::optional<SyntheticMedia> synthetic;
        try {
          synthetic = parse_synthetic(item.payload);
        } catch (const Error&) {
        }
        MediaItem media;
        if (item.locator) media.path = item.locator->path;
        if (synthetic) {
          media.kind = synthetic->kind;
          media.duration_sec = synthetic->duration_sec;
          media.has_audio = synthetic->has_audio;
        }
        MediaSource source{&media, synthetic ? &*synthetic : nullptr};
        double t = item.locator ? item.locator->start_sec : 0.0;
        Frame frame{0, t};
        switch (item.task) {
          case ExtractTask::kTranscribe:
            r.segments = extractor.transcribe(source);
            break;
          case ExtractTask::kDetect:
            r.regions = modality == Modality::kFace
                            ? extractor.detect_faces(source, {&frame, 1}).front()
                            : extractor.detect_regions(source, {&frame, 1}).front();
            break;
          case ExtractTask::kEmbed:
            if (modality == Modality::kAudio) {
              double end = item.locator && item.locator->end_sec ? *item.locator->end_sec
                                                                 : media.duration_sec;
              AudioWindow w{0, t, end};
              r.embedding = extractor.embed_audio_windows(source, {&w, 1}).front();
            } else {
              r.embedding = extractor.embed_frames(source, {&frame, 1}).front();
            }
            break;
        }
      }
      r.ok = true;
    } catch (const std::exception& e) {
      r.ok = false;
      r.embedding.reset();
      r.regions.reset();
      r.segments.reset();
      r.error = e.what();
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace avsearch

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

#include <fstream>
#include <future>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <httplib.h>

#include "avsearch/extract_protocol.hpp"

namespace avsearch {

using nlohmann::json;

namespace {

json post_with_retry(const RemoteEndpoint& endpoint, const std::string& body) {
  auto backoff = endpoint.initial_backoff;
  std::string last_failure = "no attempt made";
  const int attempts = std::max(1, endpoint.max_attempts);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    httplib::Client client(endpoint.url);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = client.Post("/extract", body, "application/json");
    if (!res) {
      last_failure = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 409) {
      throw Error(ErrorCode::kExtractorMismatch,
                  "extraction endpoint refused extractor: " + res->body);
    }
    if (res->status >= 500) {
      last_failure = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorCode::kExtraction, "extraction endpoint returned HTTP " +
                                              std::to_string(res->status) + ": " + res->body);
    }
    try {
      return json::parse(res->body);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kFormat, std::string("extraction response is not JSON: ") + e.what());
    }
  }
  throw Error(ErrorCode::kExtractorUnreachable,
              "extraction endpoint " + endpoint.url + " unreachable after " +
                  std::to_string(attempts) + " attempts: " + last_failure);
}

std::vector<ExtractItemResult> run_chunk(const RemoteEndpoint& endpoint,
                                         const ExtractorDescriptor& extractor,
                                         std::span<const ExtractItem> chunk) {
  std::string body = encode_extract_request(extractor, chunk).dump();
  auto decoded = decode_extract_results(post_with_retry(endpoint, body));

  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < decoded.size(); ++i) by_id.emplace(decoded[i].id, i);
  std::vector<ExtractItemResult> aligned;
  aligned.reserve(chunk.size());
  for (const ExtractItem& item : chunk) {
    auto it = by_id.find(item.id);
    if (it == by_id.end()) {
      ExtractItemResult missing;
      missing.id = item.id;
      missing.error = "no result returned for item";
      aligned.push_back(std::move(missing));
    } else {
      aligned.push_back(std::move(decoded[it->second]));
    }
  }
  return aligned;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Bytes shipped alongside a locator: the description for synthetic media,
// the file itself for still images, nothing for containers the sidecar reads
// from the shared path.
std::string media_payload(const MediaSource& source) {
  if (source.synthetic) return dump_synthetic(*source.synthetic);
  if (source.item && source.item->kind == MediaKind::kImage) return read_file(source.item->path);
  return {};
}

std::string media_path(const MediaSource& source) {
  return source.item ? source.item->path.string() : std::string();
}

}  // namespace

std::vector<ExtractItemResult> remote_extract_batch(const RemoteEndpoint& endpoint,
                                                    const ExtractorDescriptor& extractor,
                                                    std::span<const ExtractItem> items) {
  const std::size_t batch = std::max<std::size_t>(1, endpoint.batch_size);
  const std::size_t in_flight = std::max<std::size_t>(1, endpoint.max_in_flight);
  std::vector<ExtractItemResult> out;
  out.reserve(items.size());

  std::vector<std::future<std::vector<ExtractItemResult>>> pending;
  auto drain_one = [&] {
    auto part = pending.front().get();
    pending.erase(pending.begin());
    for (auto& r : part) out.push_back(std::move(r));
  };
  for (std::size_t begin = 0; begin < items.size(); begin += batch) {
    auto chunk = items.subspan(begin, std::min(batch, items.size() - begin));
    if (pending.size() >= in_flight) drain_one();
    pending.push_back(std::async(std::launch::async, run_chunk, std::cref(endpoint),
                                 std::cref(extractor), chunk));
  }
  while (!pending.empty()) drain_one();
  return out;
}

std::vector<ExtractorDescriptor> fetch_remote_descriptors(const RemoteEndpoint& endpoint) {
  httplib::Client client(endpoint.url);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
  client.set_connection_timeout(secs.count() > 0 ? secs.count() : 1, 0);
  client.set_read_timeout(secs.count() > 0 ? secs.count() : 1, 0);
  httplib::Result res;
  auto backoff = endpoint.initial_backoff;
  for (int attempt = 0; attempt < std::max(1, endpoint.max_attempts); ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    res = client.Get("/info");
    if (res && res->status < 500) break;
  }
  if (!res || res->status != 200) {
    throw Error(ErrorCode::kExtractorUnreachable,
                "cannot fetch extractor info from " + endpoint.url);
  }
  std::vector<ExtractorDescriptor> out;
  try {
    const json body = json::parse(res->body);
    for (const json& d : body.at("extractors")) {
      out.push_back(descriptor_from_json(d));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("malformed /info response: ") + e.what());
  }
  return out;
}

RemoteExtractor::RemoteExtractor(RemoteEndpoint endpoint)
    : RemoteExtractor(endpoint, fetch_remote_descriptors(endpoint)) {}

RemoteExtractor::RemoteExtractor(RemoteEndpoint endpoint,
                                 std::vector<ExtractorDescriptor> descriptors)
    : endpoint_(std::move(endpoint)), descriptors_(std::move(descriptors)) {
  for (Modality m : kAllModalities) {
    bool found = false;
    for (const auto& d : descriptors_) found = found || d.modality == m;
    if (!found) {
      throw Error(ErrorCode::kConfig, "extraction endpoint does not advertise modality " +
                                          std::string(to_string(m)));
    }
  }
}

ExtractorDescriptor RemoteExtractor::descriptor(Modality modality) const {
  for (const auto& d : descriptors_) {
    if (d.modality == modality) return d;
  }
  throw Error(ErrorCode::kConfig, "no remote extractor for modality " + std::string(to_string(modality)));
}

std::vector<ExtractItemResult> RemoteExtractor::call(Modality modality,
                                                     std::span<const ExtractItem> items) const {
  auto results = remote_extract_batch(endpoint_, descriptor(modality), items);
  for (const auto& r : results) {
    if (!r.ok) failed_.fetch_add(1);
  }
  return results;
}

Embedding RemoteExtractor::embed_text(Modality modality, std::string_view text) const {
  ExtractItem item{"q", PayloadKind::kText, std::string(text), ExtractTask::kEmbed, std::nullopt};
  auto r = call(modality, {&item, 1});
  if (!r.front().ok) {
    // Sidecars report empty queries as item errors.
    throw Error(ErrorCode::kExtraction, "remote text embedding failed: " + r.front().error);
  }
  if (!r.front().embedding) throw Error(ErrorCode::kEmptyQuery, "query text has nothing to embed");
  return *r.front().embedding;
}

Embedding RemoteExtractor::embed_exemplar(Modality modality, const Exemplar& exemplar) const {
  ExtractItem item{"q", exemplar.kind, exemplar.bytes,
                   modality == Modality::kRegion || modality == Modality::kFace
                       ? ExtractTask::kDetect
                       : ExtractTask::kEmbed,
                   std::nullopt};
  if (exemplar.kind == PayloadKind::kText) item.task = ExtractTask::kEmbed;
  auto r = call(modality, {&item, 1});
  const ExtractItemResult& res = r.front();
  if (!res.ok) throw Error(ErrorCode::kExtraction, "remote exemplar embedding failed: " + res.error);
  if (res.embedding) return *res.embedding;
  if (res.regions && !res.regions->empty()) {
    const RegionDetection* best = &res.regions->front();
    for (const auto& d : *res.regions) {
      if (d.score > best->score) best = &d;
    }
    return best->embedding;
  }
  throw Error(ErrorCode::kEmptyQuery, "exemplar has nothing to embed");
}

std::vector<std::optional<Embedding>> RemoteExtractor::embed_frames(
    const MediaSource& source, std::span<const Frame> frames) const {
  std::string payload = media_payload(source);
  PayloadKind kind = PayloadKind::kImage;
  std::vector<ExtractItem> items;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    items.push_back({std::to_string(i), kind, payload, ExtractTask::kEmbed,
                     MediaLocator{media_path(source), frames[i].timestamp_sec, std::nullopt}});
  }
  std::vector<std::optional<Embedding>> out;
  for (auto& r : call(Modality::kScene, items)) out.push_back(std::move(r.embedding));
  return out;
}

std::vector<std::vector<RegionDetection>> RemoteExtractor::detect(
    Modality modality, const MediaSource& source, std::span<const Frame> frames) const {
  std::string payload = media_payload(source);
  std::vector<ExtractItem> items;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    items.push_back({std::to_string(i), PayloadKind::kImage, payload, ExtractTask::kDetect,
                     MediaLocator{media_path(source), frames[i].timestamp_sec, std::nullopt}});
  }
  std::vector<std::vector<RegionDetection>> out;
  for (auto& r : call(modality, items)) {
    out.push_back(r.regions ? std::move(*r.regions) : std::vector<RegionDetection>{});
  }
  return out;
}

std::vector<std::vector<RegionDetection>> RemoteExtractor::detect_regions(
    const MediaSource& source, std::span<const Frame> frames) const {
  return detect(Modality::kRegion, source, frames);
}

std::vector<std::vector<RegionDetection>> RemoteExtractor::detect_faces(
    const MediaSource& source, std::span<const Frame> frames) const {
  return detect(Modality::kFace, source, frames);
}

std::vector<std::optional<Embedding>> RemoteExtractor::embed_audio_windows(
    const MediaSource& source, std::span<const AudioWindow> windows) const {
  std::string payload = media_payload(source);
  std::vector<ExtractItem> items;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    items.push_back({std::to_string(i), PayloadKind::kAudio, payload, ExtractTask::kEmbed,
                     MediaLocator{media_path(source), windows[i].start_sec, windows[i].end_sec}});
  }
  std::vector<std::optional<Embedding>> out;
  for (auto& r : call(Modality::kAudio, items)) out.push_back(std::move(r.embedding));
  return out;
}

std::vector<TranscriptSegment> RemoteExtractor::transcribe(const MediaSource& source) const {
  ExtractItem item{"0", PayloadKind::kAudio, media_payload(source), ExtractTask::kTranscribe,
                   MediaLocator{media_path(source), 0.0, std::nullopt}};
  auto r = call(Modality::kAudio, {&item, 1});
  if (!r.front().ok || !r.front().segments) return {};
  return validate_transcript(std::move(*r.front().segments));
}

}  // namespace avsearch

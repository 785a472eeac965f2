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

#include <atomic>
#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "avsearch/extract.hpp"

namespace avsearch {

// Wire protocol spoken between the engine and an extraction sidecar.
//
//   POST /extract
//   {"extractor": {"name", "version", "modality", "dim"},
//    "items": [{"id", "payload_kind": "text"|"image"|"audio",
//               "payload": <text, or base64 bytes>,
//               "task": "embed"|"detect"|"transcribe",
//               "locator": {"path", "start", "end"}}]}
//   -> 200 {"results": [{"id", "ok": true, "embedding": [...]} |
//                       {"id", "ok": true, "regions": [{"bbox", "score", "embedding"}]} |
//                       {"id", "ok": true, "segments": [{"start", "end", "text"}]} |
//                       {"id", "ok": false, "error": "..."}]}
//   -> 409 {"error": "extractor_mismatch", "detail"} when the sidecar does not
//      serve the requested (name, version, modality, dim).
//
//   GET /info -> {"extractors": [{"name", "version", "modality", "dim"}, ...]}

enum class ExtractTask : std::uint8_t { kEmbed, kDetect, kTranscribe };

std::string_view to_string(ExtractTask task);

struct MediaLocator {
  std::string path;
  double start_sec = 0.0;
  std::optional<double> end_sec;
};

struct ExtractItem {
  std::string id;
  PayloadKind payload_kind = PayloadKind::kText;
  std::string payload;  // text, or raw bytes for image/audio
  ExtractTask task = ExtractTask::kEmbed;
  std::optional<MediaLocator> locator;
};

struct ExtractItemResult {
  std::string id;
  bool ok = false;
  std::optional<Embedding> embedding;
  std::optional<std::vector<RegionDetection>> regions;
  std::optional<std::vector<TranscriptSegment>> segments;
  std::string error;
};

nlohmann::json to_json(const ExtractorDescriptor& d);
ExtractorDescriptor descriptor_from_json(const nlohmann::json& j);

nlohmann::json encode_extract_request(const ExtractorDescriptor& extractor,
                                      std::span<const ExtractItem> items);
std::pair<ExtractorDescriptor, std::vector<ExtractItem>> decode_extract_request(
    const nlohmann::json& body);

nlohmann::json encode_extract_results(std::span<const ExtractItemResult> results);
std::vector<ExtractItemResult> decode_extract_results(const nlohmann::json& body);

/// Serves one decoded request with a local extractor. Used by protocol
/// conformance fixtures and by in-process sidecars. Item failures become
/// item-level errors; a descriptor the extractor does not serve throws
/// Error(kExtractorMismatch).
std::vector<ExtractItemResult> serve_extract_items(const Extractor& extractor,
                                                   const ExtractorDescriptor& requested,
                                                   std::span<const ExtractItem> items);

struct RemoteEndpoint {
  std::string url;  // e.g. http://127.0.0.1:9000
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 2;
  std::chrono::milliseconds timeout{30000};
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{100};
};

/// Sends `items` in batches of `endpoint.batch_size` and returns results in
/// input order. Connection failures and 5xx responses are retried with
/// doubling backoff, then surface as Error(kExtractorUnreachable). A 409
/// surfaces as Error(kExtractorMismatch).
std::vector<ExtractItemResult> remote_extract_batch(const RemoteEndpoint& endpoint,
                                                    const ExtractorDescriptor& extractor,
                                                    std::span<const ExtractItem> items);

std::vector<ExtractorDescriptor> fetch_remote_descriptors(const RemoteEndpoint& endpoint);

// Extractor backed by a sidecar. Item-level failures leave the unit without
// an embedding and are counted in `failed_items()`.
class RemoteExtractor final : public Extractor {
 public:
  /// Queries GET /info once and requires every modality to be advertised.
  explicit RemoteExtractor(RemoteEndpoint endpoint);
  RemoteExtractor(RemoteEndpoint endpoint, std::vector<ExtractorDescriptor> descriptors);

  ExtractorDescriptor descriptor(Modality modality) const override;
  Embedding embed_text(Modality modality, std::string_view text) const override;
  Embedding embed_exemplar(Modality modality, const Exemplar& exemplar) const override;
  std::vector<std::optional<Embedding>> embed_frames(
      const MediaSource& source, std::span<const Frame> frames) const override;
  std::vector<std::vector<RegionDetection>> detect_regions(
      const MediaSource& source, std::span<const Frame> frames) const override;
  std::vector<std::vector<RegionDetection>> detect_faces(
      const MediaSource& source, std::span<const Frame> frames) const override;
  std::vector<std::optional<Embedding>> embed_audio_windows(
      const MediaSource& source, std::span<const AudioWindow> windows) const override;
  std::vector<TranscriptSegment> transcribe(const MediaSource& source) const override;

  std::size_t failed_items() const noexcept { return failed_.load(); }

 private:
  std::vector<ExtractItemResult> call(Modality modality, std::span<const ExtractItem> items) const;
  std::vector<std::vector<RegionDetection>> detect(Modality modality, const MediaSource& source,
                                                   std::span<const Frame> frames) const;

  RemoteEndpoint endpoint_;
  std::vector<ExtractorDescriptor> descriptors_;
  mutable std::atomic<std::size_t> failed_{0};
};

}  // namespace avsearch

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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "avsearch/common.hpp"
#include "avsearch/media.hpp"
#include "avsearch/synthetic.hpp"

namespace avsearch {

// One embedding space per modality. Scene, region and audio spaces are
// shared with text queries; the face space encodes identity.
enum class Modality : std::uint8_t { kScene, kRegion, kFace, kAudio };

std::string_view to_string(Modality modality);
std::optional<Modality> parse_modality(std::string_view name);

inline constexpr Modality kAllModalities[] = {Modality::kScene, Modality::kRegion,
                                              Modality::kFace, Modality::kAudio};

/// Unit-norm float vector. Construct through `Embedding::from_raw`, which
/// normalizes and rejects zero or non-finite input.
class Embedding {
 public:
  Embedding() = default;

  static Embedding from_raw(std::vector<float> values);
  /// Wraps already-normalized values; throws if the norm is off by > 1e-4.
  static Embedding from_unit(std::vector<float> values);

  std::span<const float> values() const noexcept { return values_; }
  std::size_t dim() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  std::vector<float> values_;
};

float cosine(const Embedding& a, const Embedding& b);

struct ExtractorDescriptor {
  std::string name;
  Modality modality = Modality::kScene;
  std::uint32_t dim = 0;
  std::string version;

  friend bool operator==(const ExtractorDescriptor&, const ExtractorDescriptor&) =
      default;
};

std::string describe(const ExtractorDescriptor& d);

/// Throws Error(kExtractorMismatch) unless both sides embed into the same
/// space: name, version, modality and dim all equal.
void require_compatible(const ExtractorDescriptor& index_side,
                        const ExtractorDescriptor& query_side);

struct RegionDetection {
  BoundingBox bbox;
  float score = 0.0f;
  Embedding embedding;
};

struct TranscriptSegment {
  double start_sec = 0.0;
  double end_sec = 0.0;
  std::string text;

  friend bool operator==(const TranscriptSegment&, const TranscriptSegment&) =
      default;
};

enum class PayloadKind : std::uint8_t { kText, kImage, kAudio };

std::string_view to_string(PayloadKind kind);
std::optional<PayloadKind> parse_payload_kind(std::string_view name);

// Query-by-example input: raw image or audio bytes. The reference extractor
// expects the bytes of a `.wisedesc` document.
struct Exemplar {
  PayloadKind kind = PayloadKind::kImage;
  std::string bytes;
};

// Everything an extractor may look at for one media item. `synthetic` is set
// for `.wisedesc` media.
struct MediaSource {
  const MediaItem* item = nullptr;
  const SyntheticMedia* synthetic = nullptr;
};

// Pluggable feature extraction. Implementations must be safe to call from
// many threads at once; per-item methods are batched over the sampled units
// of one media item and return results aligned with their input.
class Extractor {
 public:
  virtual ~Extractor() = default;

  virtual ExtractorDescriptor descriptor(Modality modality) const = 0;

  /// Throws Error(kEmptyQuery) when `text` has no tokens.
  virtual Embedding embed_text(Modality modality, std::string_view text) const = 0;
  virtual Embedding embed_exemplar(Modality modality, const Exemplar& exemplar) const = 0;

  /// nullopt marks a frame with nothing to embed; it is not indexed.
  virtual std::vector<std::optional<Embedding>> embed_frames(
      const MediaSource& source, std::span<const Frame> frames) const = 0;
  virtual std::vector<std::vector<RegionDetection>> detect_regions(
      const MediaSource& source, std::span<const Frame> frames) const = 0;
  virtual std::vector<std::vector<RegionDetection>> detect_faces(
      const MediaSource& source, std::span<const Frame> frames) const = 0;
  virtual std::vector<std::optional<Embedding>> embed_audio_windows(
      const MediaSource& source, std::span<const AudioWindow> windows) const = 0;

  /// Non-overlapping segments sorted by start.
  virtual std::vector<TranscriptSegment> transcribe(const MediaSource& source) const = 0;
};

/// Sorts by start and checks start < end, non-empty text and no overlap.
/// Throws Error(kExtraction) on violation.
std::vector<TranscriptSegment> validate_transcript(std::vector<TranscriptSegment> segments);

struct ReferenceExtractorOptions {
  std::uint32_t dim = 256;
  std::uint64_t seed = 0x5eed0f5ca1ab1e5ULL;
};

// Deterministic token-hashing extractor. A text embeds as the normalized
// histogram of its tokens hashed into `dim` buckets, so texts sharing tokens
// are close and texts sharing none are orthogonal (up to hash collisions,
// which are accepted). Synthetic media embed their description fields through
// the same function, which puts queries and media in one space. Faces hash
// identity tokens into a separately seeded space.
class ReferenceExtractor final : public Extractor {
 public:
  static constexpr std::string_view kName = "reference";
  static constexpr std::string_view kVersion = "1";

  explicit ReferenceExtractor(ReferenceExtractorOptions options = {});

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

  /// Bucket a token lands in for the given modality's space.
  std::uint32_t bucket(Modality modality, std::string_view token) const;

 private:
  std::optional<Embedding> embed_tokens(Modality modality, std::string_view text) const;
  const SyntheticMedia& require_synthetic(const MediaSource& source) const;

  ReferenceExtractorOptions options_;
};

}  // namespace avsearch

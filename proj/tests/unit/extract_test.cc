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

#include "avsearch/extract.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "avsearch/synthetic.hpp"
#include "avsearch/vector_math.hpp"

namespace avsearch {
namespace {

double norm(const Embedding& e) {
  double s = 0.0;
  for (float v : e.values()) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

TEST(Embedding, FromRawNormalizes) {
  Embedding e = Embedding::from_raw({3.0f, 4.0f});
  EXPECT_FLOAT_EQ(e.values()[0], 0.6f);
  EXPECT_FLOAT_EQ(e.values()[1], 0.8f);
  EXPECT_THROW(Embedding::from_raw({0.0f, 0.0f}), Error);
  EXPECT_THROW(Embedding::from_unit({1.0f, 1.0f}), Error);
}

TEST(ReferenceExtractor, Deterministic) {
  ReferenceExtractor a, b;
  EXPECT_EQ(a.embed_text(Modality::kScene, "horse"), a.embed_text(Modality::kScene, "horse"));
  EXPECT_EQ(a.embed_text(Modality::kScene, "horse"), b.embed_text(Modality::kScene, "horse"));
}

TEST(ReferenceExtractor, TokenOverlapOrdersSimilarity) {
  ReferenceExtractor ref;
  auto horse = ref.embed_text(Modality::kScene, "horse");
  auto rider = ref.embed_text(Modality::kScene, "horse rider");
  auto sunset = ref.embed_text(Modality::kScene, "sunset");
  ASSERT_NE(ref.bucket(Modality::kScene, "horse"), ref.bucket(Modality::kScene, "sunset"));
  EXPECT_GT(cosine(horse, rider), cosine(horse, sunset));
}

TEST(ReferenceExtractor, EmptyTextIsAnError) {
  ReferenceExtractor ref;
  try {
    ref.embed_text(Modality::kScene, "");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyQuery);
  }
}

TEST(ReferenceExtractor, EmbeddingIsNormalizedTokenHistogram) {
  // Independent construction: count tokens per bucket, divide by the norm.
  ReferenceExtractor ref;
  auto e = ref.embed_text(Modality::kAudio, "siren siren dog");
  std::vector<double> expect(ref.descriptor(Modality::kAudio).dim, 0.0);
  expect[ref.bucket(Modality::kAudio, "siren")] += 2;
  expect[ref.bucket(Modality::kAudio, "dog")] += 1;
  double n = 0;
  for (double v : expect) n += v * v;
  n = std::sqrt(n);
  for (std::size_t i = 0; i < expect.size(); ++i) EXPECT_NEAR(e.values()[i], expect[i] / n, 1e-7);
}

TEST(ReferenceExtractor, OutputsAreUnitNorm) {
  ReferenceExtractor ref;
  for (const char* text : {"a", "horse", "the quick brown fox jumps over the lazy dog", "ü ö ä"}) {
    for (Modality m : kAllModalities) EXPECT_NEAR(norm(ref.embed_text(m, text)), 1.0, 1e-6);
  }
}

TEST(ReferenceExtractor, FacesUseTheirOwnSpace) {
  ReferenceExtractor ref;
  EXPECT_EQ(ref.bucket(Modality::kScene, "horse"), ref.bucket(Modality::kAudio, "horse"));
  int differ = 0;
  for (const char* t : {"alice", "bob", "carol", "dave", "erin", "frank"}) {
    differ += ref.bucket(Modality::kFace, t) != ref.bucket(Modality::kScene, t);
  }
  EXPECT_GT(differ, 0);
}

TEST(ReferenceExtractor, FramesFollowActiveSceneText) {
  ReferenceExtractor ref;
  SyntheticMedia media = parse_synthetic(R"({"kind": "video", "duration_sec": 6,
    "scene_text": [{"start": 0, "end": 2, "text": "horse"}, {"start": 4, "end": 6, "text": "train"}]})");
  MediaItem item;
  item.kind = MediaKind::kVideo;
  item.duration_sec = 6;
  std::vector<Frame> frames = {{0, 0.0}, {0, 1.5}, {0, 2.0}, {0, 4.0}};
  auto out = ref.embed_frames({&item, &media}, frames);
  ASSERT_EQ(out.size(), 4u);
  EXPECT_EQ(*out[0], ref.embed_text(Modality::kScene, "horse"));
  EXPECT_EQ(*out[1], ref.embed_text(Modality::kScene, "horse"));
  EXPECT_FALSE(out[2].has_value());
  EXPECT_EQ(*out[3], ref.embed_text(Modality::kScene, "train"));
}

TEST(ReferenceExtractor, DetectionsAndAudio) {
  ReferenceExtractor ref;
  SyntheticMedia media = parse_synthetic(R"({"kind": "video", "duration_sec": 10,
    "objects": [{"label": "hat", "bbox": [0.1, 0.1, 0.2, 0.2], "start": 1, "end": 3, "score": 0.7}],
    "faces": [{"identity": "ada", "bbox": [0.5, 0.5, 0.9, 0.9], "start": 0, "end": 1}],
    "audio_text": [{"start": 5, "end": 6, "text": "gunshot"}],
    "transcript": [{"start": 7, "end": 8, "text": "wait what"}, {"start": 1, "end": 2, "text": "hi"}]})");
  MediaItem item;
  item.kind = MediaKind::kVideo;
  item.duration_sec = 10;
  std::vector<Frame> frames = {{0, 0.5}, {0, 2.0}};
  auto regions = ref.detect_regions({&item, &media}, frames);
  EXPECT_TRUE(regions[0].empty());
  ASSERT_EQ(regions[1].size(), 1u);
  EXPECT_FLOAT_EQ(regions[1][0].score, 0.7f);
  EXPECT_EQ(regions[1][0].bbox, (BoundingBox{0.1f, 0.1f, 0.2f, 0.2f}));
  auto faces = ref.detect_faces({&item, &media}, frames);
  ASSERT_EQ(faces[0].size(), 1u);
  EXPECT_TRUE(faces[1].empty());
  std::vector<AudioWindow> windows = {{0, 0, 4}, {0, 4, 8}};
  auto audio = ref.embed_audio_windows({&item, &media}, windows);
  EXPECT_FALSE(audio[0].has_value());
  EXPECT_EQ(*audio[1], ref.embed_text(Modality::kAudio, "gunshot"));
  auto transcript = ref.transcribe({&item, &media});
  ASSERT_EQ(transcript.size(), 2u);
  EXPECT_EQ(transcript[0].text, "hi");
  EXPECT_EQ(transcript[1].start_sec, 7.0);
}

TEST(ReferenceExtractor, RefusesNonSyntheticMedia) {
  ReferenceExtractor ref;
  MediaItem item;
  item.kind = MediaKind::kImage;
  std::vector<Frame> frames = {{0, 0.0}};
  EXPECT_THROW(ref.embed_frames({&item, nullptr}, frames), Error);
}

TEST(ReferenceExtractor, ExemplarsAreSyntheticDocuments) {
  ReferenceExtractor ref;
  Exemplar face{PayloadKind::kImage, R"({"kind": "image", "faces": [{"identity": "ada", "bbox": [0, 0, 1, 1]}]})"};
  EXPECT_EQ(ref.embed_exemplar(Modality::kFace, face), ref.embed_text(Modality::kFace, "ada"));
  Exemplar scene{PayloadKind::kImage, R"({"kind": "image", "scene_text": [{"text": "a dog"}]})"};
  EXPECT_EQ(ref.embed_exemplar(Modality::kScene, scene), ref.embed_text(Modality::kScene, "a dog"));
  EXPECT_THROW(ref.embed_exemplar(Modality::kRegion, scene), Error);
}

TEST(Compatibility, MismatchIsRejected) {
  ExtractorDescriptor a{"clip", Modality::kScene, 768, "1"};
  ExtractorDescriptor b = a;
  EXPECT_NO_THROW(require_compatible(a, b));
  b.version = "2";
  try {
    require_compatible(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kExtractorMismatch);
  }
  b = a;
  b.name = "other";
  EXPECT_THROW(require_compatible(a, b), Error);
  b = a;
  b.modality = Modality::kAudio;
  EXPECT_THROW(require_compatible(a, b), Error);
}

TEST(ReferenceExtractor, Dimension768IsValid) {
  ReferenceExtractor ref({768});
  EXPECT_EQ(ref.descriptor(Modality::kScene).dim, 768u);
  EXPECT_EQ(ref.embed_text(Modality::kScene, "horse").dim(), 768u);
}

TEST(ValidateTranscript, SortsAndRejectsOverlap) {
  auto v = validate_transcript({{5, 6, "b"}, {1, 2, "a"}});
  EXPECT_EQ(v[0].text, "a");
  EXPECT_THROW(validate_transcript({{1, 3, "a"}, {2, 4, "b"}}), Error);
  EXPECT_THROW(validate_transcript({{2, 1, "a"}}), Error);
  EXPECT_THROW(validate_transcript({{1, 2, ""}}), Error);
}

}  // namespace
}  // namespace avsearch

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

#include <atomic>
#include <cmath>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "avsearch/service.hpp"
#include "avsearch/synthetic.hpp"
#include "process.hpp"
#include "test_support.hpp"

namespace avsearch {
namespace {

nlohmann::json fixture(const std::string& name) {
  return nlohmann::json::parse(testing::read_file(std::filesystem::path(AVSEARCH_FIXTURE_DIR) / name));
}

std::vector<ExtractItem> golden_items() {
  ExtractItem q0{"q0", PayloadKind::kText, "person riding a horse", ExtractTask::kEmbed, std::nullopt};
  ExtractItem q1{"q1", PayloadKind::kImage, "hello", ExtractTask::kEmbed, std::nullopt};
  ExtractItem f7{"f7", PayloadKind::kImage, "", ExtractTask::kDetect, MediaLocator{"/media/clip.mp4", 3.5, 4.0}};
  return {q0, q1, f7};
}

TEST(ExtractProtocol, EncodesGoldenRequest) {
  ReferenceExtractor ref;
  EXPECT_EQ(encode_extract_request(ref.descriptor(Modality::kScene), golden_items()),
            fixture("extract_request.json"));
}

TEST(ExtractProtocol, DecodesGoldenRequest) {
  auto [descriptor, items] = decode_extract_request(fixture("extract_request.json"));
  EXPECT_EQ(descriptor, ReferenceExtractor().descriptor(Modality::kScene));
  ASSERT_EQ(items.size(), 3u);
  EXPECT_EQ(items[1].payload, "hello");
  EXPECT_EQ(items[2].task, ExtractTask::kDetect);
  ASSERT_TRUE(items[2].locator.has_value());
  EXPECT_EQ(items[2].locator->path, "/media/clip.mp4");
  EXPECT_EQ(items[2].locator->end_sec, 4.0);
}

TEST(ExtractProtocol, GoldenResponseRoundTrips) {
  auto body = fixture("extract_response.json");
  auto results = decode_extract_results(body);
  ASSERT_EQ(results.size(), 5u);
  EXPECT_EQ(results[0].embedding->values()[1], 1.0f);
  ASSERT_TRUE(results[2].regions.has_value());
  EXPECT_EQ((*results[2].regions)[0].bbox, (BoundingBox{0.25f, 0.25f, 0.75f, 0.75f}));
  EXPECT_EQ((*results[3].segments)[0].text, "wait what");
  EXPECT_FALSE(results[4].ok);
  EXPECT_EQ(results[4].error, "could not decode frame");
  for (const auto& r : results) {
    if (!r.embedding) continue;
    double n = 0;
    for (float v : r.embedding->values()) n += double(v) * v;
    EXPECT_NEAR(std::sqrt(n), 1.0, 1e-6);
  }
  EXPECT_EQ(encode_extract_results(results), body);
}

TEST(ExtractProtocol, MalformedBodiesAreFormatErrors) {
  EXPECT_THROW(decode_extract_request(nlohmann::json{{"items", 3}}), Error);
  EXPECT_THROW(decode_extract_results(nlohmann::json::object()), Error);
  auto bad = fixture("extract_response.json");
  bad["results"][0]["embedding"] = {0.0, 0.0};
  auto results = decode_extract_results(bad);
  EXPECT_FALSE(results[0].ok);
}

class ProtocolServer : public ::testing::Test {
 protected:
  void SetUp() override {
    service_ = std::make_unique<ExtractService>(ref_, ServiceConfig{"127.0.0.1", 0, ""});
    service_->start();
    endpoint_.url = "http://127.0.0.1:" + std::to_string(service_->port());
    endpoint_.initial_backoff = std::chrono::milliseconds(1);
  }

  std::shared_ptr<ReferenceExtractor> ref_ = std::make_shared<ReferenceExtractor>();
  std::unique_ptr<ExtractService> service_;
  RemoteEndpoint endpoint_;
};

std::vector<ExtractItem> text_items(std::size_t n, std::size_t offset = 0) {
  std::vector<ExtractItem> items;
  for (std::size_t i = 0; i < n; ++i) {
    ExtractItem item;
    item.id = "t" + std::to_string(offset + i);
    item.payload = "token" + std::to_string((offset + i) % 17) + " common";
    items.push_back(item);
  }
  return items;
}

TEST_F(ProtocolServer, InfoListsEveryModality) {
  auto descriptors = fetch_remote_descriptors(endpoint_);
  ASSERT_EQ(descriptors.size(), 4u);
  for (Modality m : kAllModalities) EXPECT_EQ(descriptors[static_cast<int>(m)], ref_->descriptor(m));
}

TEST_F(ProtocolServer, BatchResultsAreOrderAligned) {
  endpoint_.batch_size = 7;
  auto items = text_items(50);
  auto results = remote_extract_batch(endpoint_, ref_->descriptor(Modality::kScene), items);
  ASSERT_EQ(results.size(), items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    EXPECT_EQ(results[i].id, items[i].id);
    ASSERT_TRUE(results[i].ok);
    EXPECT_EQ(*results[i].embedding, ref_->embed_text(Modality::kScene, items[i].payload));
  }
}

TEST_F(ProtocolServer, BatchingIsTransparent) {
  auto x = text_items(13);
  auto y = text_items(8, 13);
  auto xy = x;
  xy.insert(xy.end(), y.begin(), y.end());
  const auto d = ref_->descriptor(Modality::kAudio);
  for (std::size_t batch : {1u, 3u, 32u}) {
    endpoint_.batch_size = batch;
    auto joined = remote_extract_batch(endpoint_, d, xy);
    auto a = remote_extract_batch(endpoint_, d, x);
    auto b = remote_extract_batch(endpoint_, d, y);
    a.insert(a.end(), b.begin(), b.end());
    ASSERT_EQ(joined.size(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(joined[i].id, a[i].id);
      EXPECT_EQ(joined[i].embedding, a[i].embedding);
    }
  }
}

TEST_F(ProtocolServer, MismatchedExtractorIsRefused) {
  ExtractorDescriptor wrong = ref_->descriptor(Modality::kScene);
  wrong.version = "2";
  try {
    remote_extract_batch(endpoint_, wrong, text_items(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kExtractorMismatch);
  }
}

TEST_F(ProtocolServer, ItemErrorsStayItemLevel) {
  auto items = text_items(3);
  items[1].payload = "   ";
  auto results = remote_extract_batch(endpoint_, ref_->descriptor(Modality::kScene), items);
  ASSERT_EQ(results.size(), 3u);
  EXPECT_TRUE(results[0].ok);
  EXPECT_FALSE(results[1].ok);
  EXPECT_TRUE(results[2].ok);
}

TEST_F(ProtocolServer, RemoteExtractorMatchesLocalExtractor) {
  RemoteExtractor remote(endpoint_);
  SyntheticMedia media = parse_synthetic(R"({"kind": "video", "duration_sec": 4,
    "scene_text": [{"start": 0, "end": 2, "text": "a horse"}],
    "objects": [{"label": "hat", "bbox": [0.1, 0.1, 0.3, 0.3], "start": 1, "end": 3, "score": 0.4}],
    "faces": [{"identity": "ada", "bbox": [0.5, 0.5, 0.9, 0.9]}],
    "audio_text": [{"start": 0, "end": 4, "text": "siren"}],
    "transcript": [{"start": 0.5, "end": 1.5, "text": "wait what"}]})");
  MediaItem item;
  item.kind = MediaKind::kVideo;
  item.duration_sec = 4;
  item.has_audio = true;
  item.path = "/virtual/clip.wisedesc";
  MediaSource source{&item, &media};
  std::vector<Frame> frames = {{0, 0.0}, {0, 1.5}, {0, 2.5}};
  std::vector<AudioWindow> windows = {{0, 0, 4}, {0, 2, 4}};

  EXPECT_EQ(remote.embed_frames(source, frames), ref_->embed_frames(source, frames));
  auto rr = remote.detect_regions(source, frames);
  auto lr = ref_->detect_regions(source, frames);
  ASSERT_EQ(rr.size(), lr.size());
  for (std::size_t i = 0; i < rr.size(); ++i) {
    ASSERT_EQ(rr[i].size(), lr[i].size());
    for (std::size_t j = 0; j < rr[i].size(); ++j) {
      EXPECT_EQ(rr[i][j].bbox, lr[i][j].bbox);
      EXPECT_EQ(rr[i][j].score, lr[i][j].score);
      EXPECT_EQ(rr[i][j].embedding, lr[i][j].embedding);
    }
  }
  EXPECT_EQ(remote.detect_faces(source, frames).size(), 3u);
  EXPECT_EQ(remote.embed_audio_windows(source, windows), ref_->embed_audio_windows(source, windows));
  auto transcript = remote.transcribe(source);
  ASSERT_EQ(transcript.size(), 1u);
  EXPECT_EQ(transcript[0].text, "wait what");
  EXPECT_EQ(remote.embed_text(Modality::kFace, "ada"), ref_->embed_text(Modality::kFace, "ada"));
  EXPECT_EQ(remote.failed_items(), 0u);
}

TEST(RemoteEndpoint, UnreachableAfterRetries) {
  RemoteEndpoint endpoint;
  endpoint.url = "http://127.0.0.1:" + std::to_string(testing::free_port());
  endpoint.max_attempts = 2;
  endpoint.initial_backoff = std::chrono::milliseconds(1);
  endpoint.timeout = std::chrono::milliseconds(200);
  try {
    remote_extract_batch(endpoint, ReferenceExtractor().descriptor(Modality::kScene), text_items(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kExtractorUnreachable);
  }
}

TEST(RemoteEndpoint, RetriesServerErrors) {
  ReferenceExtractor ref;
  std::atomic<int> calls{0};
  httplib::Server flaky;
  flaky.Post("/extract", [&](const httplib::Request& req, httplib::Response& res) {
    if (calls.fetch_add(1) < 2) {
      res.status = 503;
      return;
    }
    auto [d, items] = decode_extract_request(nlohmann::json::parse(req.body));
    res.set_content(encode_extract_results(serve_extract_items(ref, d, items)).dump(), "application/json");
  });
  int port = flaky.bind_to_any_port("127.0.0.1");
  std::thread t([&] { flaky.listen_after_bind(); });
  flaky.wait_until_ready();

  RemoteEndpoint endpoint;
  endpoint.url = "http://127.0.0.1:" + std::to_string(port);
  endpoint.max_attempts = 3;
  endpoint.initial_backoff = std::chrono::milliseconds(1);
  auto results = remote_extract_batch(endpoint, ref.descriptor(Modality::kScene), text_items(4));
  EXPECT_EQ(results.size(), 4u);
  EXPECT_EQ(calls.load(), 3);
  flaky.stop();
  t.join();
}

}  // namespace
}  // namespace avsearch

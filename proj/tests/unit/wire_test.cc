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

#include "avsearch/wire.hpp"

#include <gtest/gtest.h>

namespace avsearch {
namespace {

using nlohmann::json;

void expect_bad(const std::function<void()>& f) {
  try {
    f();
    ADD_FAILURE() << "accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

bool same_query(const Query& a, const Query& b) {
  return a.modality == b.modality && a.text == b.text && a.compose_text == b.compose_text &&
         a.alpha == b.alpha && a.filters == b.filters && a.topk == b.topk &&
         a.exemplar.has_value() == b.exemplar.has_value() &&
         (!a.exemplar || (a.exemplar->kind == b.exemplar->kind && a.exemplar->bytes == b.exemplar->bytes));
}

TEST(Wire, QueryRoundTrip) {
  Query q;
  q.modality = QueryModality::kFace;
  q.text = "in snow";
  q.compose_text = "at night";
  q.alpha = 0.25;
  q.topk = 0;
  q.filters = {{"country", "Germany"}, {"year", "1944"}};
  q.exemplar = Exemplar{PayloadKind::kImage, std::string("\x00\xff\x10 binary", 10)};
  EXPECT_TRUE(same_query(query_from_json(to_json(q)), q));
  EXPECT_TRUE(same_query(query_from_json(json::parse(to_json(q).dump())), q));
  Query minimal;
  EXPECT_TRUE(same_query(query_from_json(to_json(minimal)), minimal));
}

TEST(Wire, RequestDefaultsAndFilterForms) {
  Query q = query_from_json({{"q", "world war"}});
  EXPECT_EQ(q.modality, QueryModality::kScene);
  EXPECT_EQ(q.topk, 10u);
  q = query_from_json({{"q", "x"}, {"filters", {{"country", "Germany"}}}});
  EXPECT_EQ(q.filters, (std::vector<MetadataFilter>{{"country", "Germany"}}));
  q = query_from_json({{"exemplar", {{"kind", "text"}, {"data", "raw words"}}}});
  EXPECT_EQ(q.exemplar->bytes, "raw words");
}

TEST(Wire, MalformedRequestsAreInvalidArguments) {
  expect_bad([] { query_from_json(json::array()); });
  expect_bad([] { query_from_json({{"modality", "smell"}}); });
  expect_bad([] { query_from_json({{"topk", -1}}); });
  expect_bad([] { query_from_json({{"topk", 10001}}); });
  expect_bad([] { query_from_json({{"topk", "ten"}}); });
  expect_bad([] { query_from_json({{"alpha", 1.5}}); });
  expect_bad([] { query_from_json({{"filters", {{{"field", "x"}}}}}); });
  expect_bad([] { query_from_json({{"exemplar", {{"kind", "image"}, {"data", "!!"}}}}); });
  expect_bad([] { query_from_json({{"exemplar", {{"kind", "smell"}, {"data", ""}}}}); });
}

TEST(Wire, UrlParameters) {
  Query q = query_from_params({{"q", "train"}, {"modality", "object"}, {"topk", "3"}, {"alpha", "0.5"},
                               {"filter", "country:Germany"}, {"filter", "year:1944"}, {"ignored", "x"}});
  EXPECT_EQ(q.text, "train");
  EXPECT_EQ(q.modality, QueryModality::kObject);
  EXPECT_EQ(q.topk, 3u);
  EXPECT_EQ(q.alpha, 0.5);
  EXPECT_EQ(q.filters, (std::vector<MetadataFilter>{{"country", "Germany"}, {"year", "1944"}}));
  expect_bad([] { query_from_params({{"topk", "3x"}}); });
  expect_bad([] { query_from_params({{"alpha", "half"}}); });
  expect_bad([] { query_from_params({{"modality", "taste"}}); });
  expect_bad([] { query_from_params({{"filter", "nocolon"}}); });
}

TEST(Wire, ResponseRoundTrip) {
  SearchResponse r;
  ResultHit a;
  a.media_id = 7;
  a.name = "clip.mp4";
  a.score = 0.8125;
  a.t_start = 1.5;
  a.t_end = 4.0;
  a.support = 6;
  a.shard = "A";
  ResultHit b;
  b.media_id = 2;
  b.name = "photo.jpg";
  b.score = 0.5;
  b.bbox = BoundingBox{0.25f, 0.5f, 0.75f, 1.0f};
  b.snippet = "wait what";
  b.shard = "B";
  r.results = {a, b};
  r.degraded = true;
  r.missing_shards = {"C"};
  EXPECT_EQ(response_from_json(json::parse(to_json(r).dump())), r);

  json j = to_json(b);
  EXPECT_FALSE(j.contains("t_start"));
  EXPECT_FALSE(j.contains("support"));
  EXPECT_EQ(j["bbox"], json({0.25, 0.5, 0.75, 1.0}));
}

}  // namespace
}  // namespace avsearch

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

#include "avsearch/aggregator.hpp"

#include <atomic>
#include <random>

#include <gtest/gtest.h>

#include "avsearch/extract_protocol.hpp"
#include "avsearch/service.hpp"
#include "corpus.hpp"

namespace avsearch {
namespace {

using nlohmann::json;

ResultHit hit(MediaId media, double score, std::string name = {}) {
  ResultHit h;
  h.media_id = media;
  h.score = score;
  h.name = name.empty() ? "m" + std::to_string(media) : std::move(name);
  return h;
}

json reference_info(std::string role = "node") {
  json extractors = json::array();
  ReferenceExtractor ref;
  for (Modality m : kAllModalities) extractors.push_back(to_json(ref.descriptor(m)));
  return {{"role", role}, {"extractors", extractors}};
}

// Replays a fixed response; can be told to fail.
class StaticShard final : public ShardClient {
 public:
  explicit StaticShard(std::vector<ResultHit> hits, json info = reference_info())
      : hits_(std::move(hits)), info_(std::move(info)) {}
  SearchResponse search(const Query& q) const override {
    ++calls;
    if (failures_left > 0) {
      --failures_left;
      throw Error(ErrorCode::kFederation, "shard down");
    }
    SearchResponse r;
    r.results = hits_;
    if (r.results.size() > q.topk) r.results.resize(q.topk);
    return r;
  }
  json info() const override { return info_; }

  mutable std::atomic<int> calls{0};
  mutable std::atomic<int> failures_left{0};

 private:
  std::vector<ResultHit> hits_;
  json info_;
};

std::vector<std::pair<std::string, double>> named_scores(const SearchResponse& r) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& h : r.results) out.emplace_back(h.shard + "/" + h.name, h.score);
  return out;
}

TEST(Aggregator, MergesSortedLists) {
  Aggregator agg;
  agg.register_shard("A", std::make_shared<StaticShard>(std::vector{hit(1, 0.9, "x"), hit(2, 0.5, "y")}));
  agg.register_shard("B", std::make_shared<StaticShard>(std::vector{hit(1, 0.7, "z")}));
  Query q;
  q.topk = 2;
  auto r = agg.search(q);
  EXPECT_EQ(named_scores(r), (std::vector<std::pair<std::string, double>>{{"A/x", 0.9}, {"B/z", 0.7}}));
  EXPECT_FALSE(r.degraded);
}

TEST(Aggregator, EqualScoresPreferEarlierShardName) {
  Aggregator agg;
  agg.register_shard("B", std::make_shared<StaticShard>(std::vector{hit(1, 0.8, "b")}));
  agg.register_shard("A", std::make_shared<StaticShard>(std::vector{hit(5, 0.8, "a")}));
  Query q;
  auto r = agg.search(q);
  ASSERT_EQ(r.results.size(), 2u);
  EXPECT_EQ(r.results[0].shard, "A");
  EXPECT_EQ(r.results[1].shard, "B");
}

TEST(Aggregator, MergeTieBreakOracle) {
  std::mt19937_64 rng(4);
  for (int c = 0; c < 300; ++c) {
    std::vector<SearchResponse> parts(3);
    std::vector<ResultHit> all;
    for (std::size_t s = 0; s < 3; ++s) {
      for (int i = 0; i < 6; ++i) {
        ResultHit h = hit(rng() % 4, 0.25 * static_cast<double>(rng() % 4));
        h.shard = std::string(1, static_cast<char>('A' + s));
        h.t_start = static_cast<double>(rng() % 3);
        parts[s].results.push_back(h);
      }
      std::sort(parts[s].results.begin(), parts[s].results.end(), federated_ranks_before);
      all.insert(all.end(), parts[s].results.begin(), parts[s].results.end());
    }
    std::stable_sort(all.begin(), all.end(), [](const ResultHit& a, const ResultHit& b) {
      return std::tuple(-a.score, a.shard, a.media_id, a.t_start.value_or(0)) <
             std::tuple(-b.score, b.shard, b.media_id, b.t_start.value_or(0));
    });
    const std::size_t k = rng() % 20;
    auto merged = merge_responses(parts, k);
    all.resize(std::min(k, all.size()));
    ASSERT_EQ(merged.results.size(), all.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
      EXPECT_EQ(merged.results[i].score, all[i].score);
      EXPECT_EQ(merged.results[i].shard, all[i].shard);
      EXPECT_EQ(merged.results[i].media_id, all[i].media_id);
    }
  }
}

TEST(Aggregator, FailedShardDegradesWithoutDisturbingOthers) {
  auto a = std::make_shared<StaticShard>(std::vector{hit(1, 0.9), hit(2, 0.4)});
  auto b = std::make_shared<StaticShard>(std::vector{hit(3, 0.95)});
  Aggregator agg;
  agg.register_shard("A", a);
  agg.register_shard("B", b);
  Query q;
  auto healthy = agg.search(q);

  b->failures_left = 2;  // first attempt and the retry both fail
  auto r = agg.search(q);
  EXPECT_TRUE(r.degraded);
  EXPECT_EQ(r.missing_shards, std::vector<std::string>{"B"});
  std::vector<ResultHit> without_b;
  for (const auto& h : healthy.results) {
    if (h.shard == "A") without_b.push_back(h);
  }
  EXPECT_EQ(r.results, without_b);

  b->failures_left = 1;  // recovered by the retry
  const int before = b->calls;
  EXPECT_EQ(agg.search(q), healthy);
  EXPECT_EQ(b->calls - before, 2);
}

TEST(Aggregator, NoResponsiveShardIsAFederationError) {
  auto a = std::make_shared<StaticShard>(std::vector{hit(1, 0.9)});
  Aggregator agg;
  Query q;
  EXPECT_THROW(agg.search(q), Error);
  agg.register_shard("A", a);
  a->failures_left = 5;
  try {
    agg.search(q);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFederation);
  }
}

TEST(Aggregator, RefusesMismatchedExtractorsAndDuplicateNames) {
  Aggregator agg;
  agg.register_shard("A", std::make_shared<StaticShard>(std::vector<ResultHit>{}));
  json other = reference_info();
  other["extractors"][0]["version"] = "2";
  try {
    agg.register_shard("B", std::make_shared<StaticShard>(std::vector<ResultHit>{}, other));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kExtractorMismatch);
  }
  EXPECT_THROW(agg.register_shard("A", std::make_shared<StaticShard>(std::vector<ResultHit>{})), Error);
  EXPECT_EQ(agg.shard_count(), 1u);
  EXPECT_EQ(agg.health_check(), (std::map<std::string, bool>{{"A", true}}));
  EXPECT_EQ(agg.info()["role"], "aggregator");
}

// Engines over a random three-way split of one corpus and over the union.
struct SplitCorpus {
  std::shared_ptr<ReferenceExtractor> extractor = std::make_shared<ReferenceExtractor>();
  testing::TempDir all, parts[3];
  std::shared_ptr<Engine> whole;
  std::shared_ptr<Engine> shards[3];
  std::vector<std::string> vocab;
};

std::unique_ptr<SplitCorpus> split_corpus(std::uint64_t seed, std::size_t n) {
  auto c = std::make_unique<SplitCorpus>();
  c->vocab = testing::distinct_vocabulary(*c->extractor, 12, "v");
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    std::string text;
    for (std::size_t w = 0, len = 1 + rng() % 4; w < len; ++w) text += c->vocab[rng() % c->vocab.size()] + " ";
    json doc = {{"kind", "image"}, {"scene_text", {{{"start", 0}, {"text", text}}}}};
    const std::string name = "item" + std::to_string(i);
    testing::write_wisedesc(c->all.path(), name, doc);
    testing::write_wisedesc(c->parts[rng() % 3].path(), name, doc);
  }
  c->whole = testing::engine_for(c->all.path(), c->extractor);
  for (int s = 0; s < 3; ++s) c->shards[s] = testing::engine_for(c->parts[s].path(), c->extractor);
  return c;
}

// Exact federation holds up to the order of equal scores: the score sequence
// is identical and every item scoring above the cut-off is present.
void expect_equivalent(const SearchResponse& fed, const SearchResponse& single) {
  ASSERT_EQ(fed.results.size(), single.results.size());
  for (std::size_t i = 0; i < fed.results.size(); ++i) {
    EXPECT_NEAR(fed.results[i].score, single.results[i].score, 1e-6);
  }
  if (single.results.empty()) return;
  const double cut = single.results.back().score;
  std::set<std::string> a, b;
  for (const auto& h : fed.results) {
    if (h.score > cut + 1e-6) a.insert(h.name);
  }
  for (const auto& h : single.results) {
    if (h.score > cut + 1e-6) b.insert(h.name);
  }
  EXPECT_EQ(a, b);
}

TEST(AggregatorProperty, ExactFederationEqualsSingleIndex) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    auto c = split_corpus(seed, 120);
    Aggregator agg;
    for (int s = 0; s < 3; ++s) {
      agg.register_shard(std::string(1, static_cast<char>('A' + s)), std::make_shared<LocalShardClient>(c->shards[s]));
    }
    for (std::size_t w = 0; w + 1 < c->vocab.size(); ++w) {
      for (std::size_t k : {1u, 5u, 20u, 200u}) {
        Query q;
        q.text = c->vocab[w] + " " + c->vocab[w + 1];
        q.topk = k;
        expect_equivalent(agg.search(q), c->whole->search(q));
      }
    }
  }
}

TEST(AggregatorProperty, NestedAggregationIsAssociative) {
  auto c = split_corpus(9, 90);
  auto shard = [&](int s) { return std::make_shared<LocalShardClient>(c->shards[s]); };
  Aggregator flat;
  flat.register_shard("A", shard(0));
  flat.register_shard("B", shard(1));
  flat.register_shard("C", shard(2));
  auto inner = std::make_shared<Aggregator>(AggregatorConfig{"AB"});
  inner->register_shard("A", shard(0));
  inner->register_shard("B", shard(1));
  Aggregator outer;
  outer.register_shard("AB", std::make_shared<LocalShardClient>(inner));
  outer.register_shard("C", shard(2));
  for (const auto& w : c->vocab) {
    Query q;
    q.text = w;
    q.topk = 15;
    EXPECT_EQ(outer.search(q), flat.search(q));
  }
}

TEST(HttpShardClient, TalksToASearchService) {
  auto c = split_corpus(12, 30);
  SearchService service(c->shards[0], {"127.0.0.1", 0, "*"});
  service.start();
  auto client = std::make_shared<HttpShardClient>("http://127.0.0.1:" + std::to_string(service.port()),
                                                  std::chrono::milliseconds(2000));
  Query q;
  q.text = c->vocab[0];
  EXPECT_EQ(client->search(q), c->shards[0]->search(q));
  EXPECT_EQ(client->info()["role"], "node");
  Query empty;
  empty.text = "  ";
  try {
    client->search(empty);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
  service.stop();
  try {
    client->search(q);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFederation);
  }
}

}  // namespace
}  // namespace avsearch

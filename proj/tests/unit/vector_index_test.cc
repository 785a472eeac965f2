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

#include "avsearch/vector_index.hpp"

#include <set>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace avsearch {
namespace {

using testing::brute_force_topk;

std::vector<RecordId> ids_of(const std::vector<SearchResult>& r) {
  std::vector<RecordId> out;
  for (const auto& x : r) out.push_back(x.id);
  return out;
}

TEST(FlatIndex, StandardBasis) {
  FlatIndex index(testing::test_descriptor(3));
  const std::vector<float> basis = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  index.add(std::vector<RecordId>{1, 2, 3}, basis);
  const std::vector<float> q = {0, 1, 0};
  auto r = index.search(q, 3);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0], (SearchResult{2, 1.0f}));
  EXPECT_EQ(r[1], (SearchResult{1, 0.0f}));  // tie broken by id
  EXPECT_EQ(r[2], (SearchResult{3, 0.0f}));
}

TEST(FlatIndex, EmptyIndexAndZeroTopk) {
  FlatIndex index(testing::test_descriptor(4));
  const std::vector<float> q = {1, 0, 0, 0};
  EXPECT_TRUE(index.search(q, 10).empty());
  index.add(7, q);
  EXPECT_TRUE(index.search(q, 0).empty());
  EXPECT_EQ(index.search(q, 10).size(), 1u);
}

TEST(FlatIndex, MatchesFullSortOracle) {
  const std::size_t dim = 32, n = 1000;
  auto data = testing::random_unit_vectors(n, dim, 21);
  auto ids = testing::iota_ids(n, 100);
  FlatIndex index(testing::test_descriptor(dim));
  index.add(ids, data);
  auto queries = testing::random_unit_vectors(50, dim, 22);
  for (std::size_t q = 0; q < 50; ++q) {
    std::span<const float> query(queries.data() + q * dim, dim);
    for (std::size_t k : {1u, 10u, 1000u, 2000u}) {
      auto got = index.search(query, k);
      auto want = brute_force_topk(data, dim, ids, query, k);
      ASSERT_EQ(ids_of(got), ids_of(want));
      for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i].score, want[i].score, 1e-6);
    }
  }
}

TEST(FlatIndex, RejectsWrongDimensionAndForeignExtractor) {
  FlatIndex index(testing::test_descriptor(4));
  const std::vector<float> three = {1, 0, 0};
  EXPECT_THROW(index.add(1, three), Error);
  EXPECT_THROW(index.search(three, 1), Error);
  Embedding q = Embedding::from_raw({1, 0, 0, 0});
  auto other = testing::test_descriptor(4);
  other.version = "2";
  try {
    index.search(q, other, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kExtractorMismatch);
  }
}

TEST(TopKCollector, KeepsBestInRankOrder) {
  TopK top(3);
  top.push(5, 0.5f);
  top.push(1, 0.9f);
  top.push(4, 0.5f);
  top.push(2, 0.1f);
  top.push(3, 0.5f);
  auto r = std::move(top).take();
  EXPECT_EQ(r, (std::vector<SearchResult>{{1, 0.9f}, {3, 0.5f}, {4, 0.5f}}));
}

class IvfFixture : public ::testing::Test {
 protected:
  static constexpr std::size_t kDim = 16;
  static constexpr std::size_t kN = 3000;
  static constexpr std::size_t kNlist = 32;

  void SetUp() override {
    data_ = testing::gaussian_mixture(kN, kDim, 20, 31, 0.5);
    ids_ = testing::iota_ids(kN);
    queries_ = testing::gaussian_mixture(40, kDim, 20, 31, 0.8);
    flat_ = std::make_unique<FlatIndex>(testing::test_descriptor(kDim));
    flat_->add(ids_, data_);
    IvfParams p;
    p.nlist = kNlist;
    p.nprobe = 1;
    ivf_ = std::make_unique<IvfFlatIndex>(testing::test_descriptor(kDim), p);
    ivf_->train(data_);
    ivf_->add(ids_, data_);
  }

  std::span<const float> query(std::size_t q) const { return {queries_.data() + q * kDim, kDim}; }

  std::vector<float> data_, queries_;
  std::vector<RecordId> ids_;
  std::unique_ptr<FlatIndex> flat_;
  std::unique_ptr<IvfFlatIndex> ivf_;
};

TEST_F(IvfFixture, FullProbeEqualsFlat) {
  for (std::size_t q = 0; q < 40; ++q) {
    for (std::size_t k : {1u, 10u, 100u}) {
      EXPECT_EQ(ivf_->search(query(q), k, {kNlist}), flat_->search(query(q), k));
    }
  }
}

TEST_F(IvfFixture, SelfQueryWithSingleProbe) {
  for (std::size_t i = 0; i < kN; i += 97) {
    std::span<const float> v(data_.data() + i * kDim, kDim);
    auto r = ivf_->search(v, 1, {1});
    ASSERT_EQ(r.size(), 1u);
    EXPECT_NEAR(r[0].score, 1.0f, 1e-5);
    std::span<const float> hit(data_.data() + r[0].id * kDim, kDim);
    EXPECT_TRUE(std::equal(hit.begin(), hit.end(), v.begin()));
  }
}

TEST_F(IvfFixture, RecallIsMonotoneInNprobe) {
  double previous = 0.0;
  for (std::size_t nprobe = 1; nprobe <= kNlist; ++nprobe) {
    double total = 0.0;
    for (std::size_t q = 0; q < 40; ++q) {
      auto truth = flat_->search(query(q), 10);
      total += testing::recall(ivf_->search(query(q), 10, {nprobe}), truth);
    }
    EXPECT_GE(total, previous) << "nprobe " << nprobe;
    previous = total;
  }
  EXPECT_DOUBLE_EQ(previous, 40.0);
}

TEST_F(IvfFixture, ProbedCellsAreNestedPrefixes) {
  for (std::size_t q = 0; q < 10; ++q) {
    auto all = ivf_->probe_order(query(q), kNlist);
    for (std::size_t p = 1; p <= kNlist; p *= 2) {
      auto some = ivf_->probe_order(query(q), p);
      EXPECT_TRUE(std::equal(some.begin(), some.end(), all.begin()));
    }
  }
}

TEST_F(IvfFixture, EveryIdLivesInExactlyOneList) {
  std::multiset<RecordId> seen;
  std::size_t total = 0;
  for (std::size_t c = 0; c < kNlist; ++c) {
    total += ivf_->list_size(c);
    for (RecordId id : ivf_->list_ids(c)) {
      seen.insert(id);
      std::span<const float> v(data_.data() + id * kDim, kDim);
      EXPECT_EQ(ivf_->assign(v), c);
    }
  }
  EXPECT_EQ(total, kN);
  EXPECT_EQ(ivf_->size(), kN);
  for (RecordId id : ids_) EXPECT_EQ(seen.count(id), 1u);
}

TEST_F(IvfFixture, ZeroTopkIsEmpty) { EXPECT_TRUE(ivf_->search(query(0), 0).empty()); }

TEST(IvfFlatIndex, UntrainedAddIsAnError) {
  IvfParams p;
  p.nlist = 4;
  IvfFlatIndex index(testing::test_descriptor(4), p);
  const std::vector<float> v = {1, 0, 0, 0};
  EXPECT_FALSE(index.is_trained());
  EXPECT_THROW(index.add(1, v), Error);
  EXPECT_THROW(index.train(v), Error);  // fewer vectors than nlist
}

TEST(IvfPqIndex, MemorizingCodebooksEqualFlat) {
  const std::size_t dim = 8, n = 200;
  auto data = testing::random_unit_vectors(n, dim, 41);
  auto ids = testing::iota_ids(n);
  IvfPqParams p;
  p.ivf.nlist = 4;
  p.m = 4;
  p.ks = 256;  // >= n: every slice is memorized
  IvfPqIndex pq(testing::test_descriptor(dim), p);
  pq.train(data);
  pq.add(ids, data);
  FlatIndex flat(testing::test_descriptor(dim));
  flat.add(ids, data);
  auto queries = testing::random_unit_vectors(30, dim, 42);
  for (std::size_t q = 0; q < 30; ++q) {
    std::span<const float> query(queries.data() + q * dim, dim);
    auto got = pq.search(query, 10, {4});
    auto want = flat.search(query, 10);
    ASSERT_EQ(ids_of(got), ids_of(want));
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i].score, want[i].score, 1e-5);
  }
  EXPECT_TRUE(pq.search(std::span<const float>(queries.data(), dim), 0, {4}).empty());
}

TEST(IvfPqIndex, ScoresEqualDotWithDecodedVectors) {
  const std::size_t dim = 32;
  auto data = testing::gaussian_mixture(2000, dim, 8, 51);
  auto ids = testing::iota_ids(2000);
  IvfPqParams p;
  p.ivf.nlist = 8;
  p.m = 8;
  p.ks = 16;
  IvfPqIndex index(testing::test_descriptor(dim), p);
  index.train(data);
  index.add(ids, data);
  auto queries = testing::random_unit_vectors(20, dim, 52);
  for (std::size_t q = 0; q < 20; ++q) {
    std::span<const float> query(queries.data() + q * dim, dim);
    for (const auto& r : index.search(query, 50, {8})) {
      auto decoded = index.quantizer().decode(index.quantizer().encode({data.data() + r.id * dim, dim}));
      double dot = 0.0;
      for (std::size_t d = 0; d < dim; ++d) dot += double(decoded[d]) * query[d];
      EXPECT_NEAR(r.score, dot, 1e-5);
    }
  }
}

TEST(BuildIndex, DefaultsAndKinds) {
  EXPECT_EQ(default_nlist(0), 1u);
  EXPECT_EQ(default_nlist(100), 10u);
  EXPECT_EQ(default_nlist(99), 9u);
  EXPECT_EQ(default_nprobe(10), 1u);
  EXPECT_EQ(default_nprobe(1024), 64u);
  EXPECT_EQ(parse_index_kind("ivf-pq"), IndexKind::kIvfPq);
  EXPECT_FALSE(parse_index_kind("hnsw").has_value());

  auto data = testing::random_unit_vectors(300, 16, 61);
  auto ids = testing::iota_ids(300);
  for (IndexKind kind : {IndexKind::kFlat, IndexKind::kIvfFlat, IndexKind::kIvfPq}) {
    IndexParams p;
    p.kind = kind;
    p.m = 4;
    p.ks = 16;
    auto index = build_index(p, testing::test_descriptor(16), ids, data);
    EXPECT_EQ(index->kind(), kind);
    EXPECT_EQ(index->size(), 300u);
    auto stored = index->ids();
    std::sort(stored.begin(), stored.end());
    EXPECT_EQ(stored, ids);
  }
  // Fewer vectors than nlist: the builder still succeeds on a tiny corpus.
  IndexParams p;
  p.kind = IndexKind::kIvfFlat;
  auto tiny = build_index(p, testing::test_descriptor(16), std::span(ids).first(1),
                          std::span<const float>(data).first(16));
  EXPECT_EQ(tiny->size(), 1u);
}

}  // namespace
}  // namespace avsearch

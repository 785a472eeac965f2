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


#include <memory>
#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "avsearch/fts.hpp"
#include "avsearch/query_engine.hpp"
#include "avsearch/vector_index.hpp"
#include "test_support.hpp"

namespace avsearch {
namespace {

constexpr std::size_t kDim = 128;
constexpr std::size_t kQueries = 64;

struct Dataset {
  explicit Dataset(std::size_t n) : n(n) {
    auto all = testing::gaussian_mixture(n + kQueries, kDim, 256, 7);
    data.assign(all.begin(), all.begin() + n * kDim);
    queries.assign(all.begin() + n * kDim, all.end());
    ids = testing::iota_ids(n);
  }
  std::span<const float> query(std::size_t q) const { return {queries.data() + (q % kQueries) * kDim, kDim}; }

  std::size_t n;
  std::vector<float> data;
  std::vector<float> queries;
  std::vector<RecordId> ids;
};

const Dataset& dataset() {
  static const Dataset ds(200000);
  return ds;
}

const VectorIndex& index_of(IndexKind kind) {
  static std::unique_ptr<VectorIndex> cache[4];
  auto& slot = cache[static_cast<int>(kind)];
  if (!slot) {
    IndexParams params;
    params.kind = kind;
    params.nlist = 512;
    params.nprobe = 16;
    params.m = 16;
    slot = build_index(params, testing::test_descriptor(kDim), dataset().ids, dataset().data);
  }
  return *slot;
}

void BM_Search(benchmark::State& state, IndexKind kind) {
  const VectorIndex& index = index_of(kind);
  const SearchParams params{static_cast<std::size_t>(state.range(0))};
  std::size_t q = 0;
  for (auto _ : state) benchmark::DoNotOptimize(index.search(dataset().query(q++), 10, params));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK_CAPTURE(BM_Search, flat, IndexKind::kFlat)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Search, ivf_flat, IndexKind::kIvfFlat)->Arg(1)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_Search, ivf_pq, IndexKind::kIvfPq)->Arg(1)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_TrainKMeans(benchmark::State& state) {
  const std::size_t k = static_cast<std::size_t>(state.range(0));
  std::span<const float> sample(dataset().data.data(), k * 64 * kDim);
  for (auto _ : state) benchmark::DoNotOptimize(train_kmeans(sample, kDim, k));
}
BENCHMARK(BM_TrainKMeans)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_FtsQuery(benchmark::State& state) {
  std::mt19937_64 rng(3);
  FtsIndex fts;
  for (DocId d = 0; d < 20000; ++d) {
    std::string text;
    for (int w = 0; w < 12; ++w) text += "w" + std::to_string(rng() % 2000) + " ";
    fts.add(d, {{"title", text}});
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fts.query("w" + std::to_string(i % 2000) + " w" + std::to_string((i * 7) % 2000)));
    ++i;
  }
}
BENCHMARK(BM_FtsQuery)->Unit(benchmark::kMicrosecond);

void BM_MergeToSegments(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::vector<Hit> hits(static_cast<std::size_t>(state.range(0)));
  for (Hit& h : hits) {
    h.media_id = 1 + rng() % 100;
    h.t_start = 0.5 * static_cast<double>(rng() % 2000);
    h.t_end = *h.t_start + 0.5;
    h.score = static_cast<double>(rng() % 1000) / 1000.0;
  }
  for (auto _ : state) benchmark::DoNotOptimize(merge_to_segments(hits, 1.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MergeToSegments)->Arg(2000)->Arg(20000);

}  // namespace
}  // namespace avsearch

BENCHMARK_MAIN();

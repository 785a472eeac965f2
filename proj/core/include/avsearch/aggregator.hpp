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

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "avsearch/query_engine.hpp"

namespace avsearch {

// One search node (or nested aggregator) behind the aggregator.
class ShardClient {
 public:
  virtual ~ShardClient() = default;
  /// Throws Error(kFederation) when the shard cannot answer in time.
  virtual SearchResponse search(const Query& query) const = 0;
  virtual nlohmann::json info() const = 0;
};

class HttpShardClient final : public ShardClient {
 public:
  HttpShardClient(std::string url, std::chrono::milliseconds timeout);
  SearchResponse search(const Query& query) const override;
  nlohmann::json info() const override;
  const std::string& url() const noexcept { return url_; }

 private:
  std::string url_;
  std::chrono::milliseconds timeout_;
};

/// Adapts an in-process backend, e.g. an Engine, to the shard interface.
class LocalShardClient final : public ShardClient {
 public:
  explicit LocalShardClient(std::shared_ptr<const SearchBackend> backend)
      : backend_(std::move(backend)) {}
  SearchResponse search(const Query& query) const override { return backend_->search(query); }
  nlohmann::json info() const override { return backend_->info(); }

 private:
  std::shared_ptr<const SearchBackend> backend_;
};

struct AggregatorConfig {
  std::string name = "aggregator";
  /// Extra attempts after a failed shard request.
  int retries = 1;
};

/// Orders by score descending, then shard, media id and start time.
bool federated_ranks_before(const ResultHit& a, const ResultHit& b) noexcept;

/// Merges shard responses into one list of at most `topk` hits. Hit shard
/// labels are kept as they are. Degradation and missing shards are unioned.
SearchResponse merge_responses(std::span<const SearchResponse> responses, std::size_t topk);

class Aggregator final : public SearchBackend {
 public:
  explicit Aggregator(AggregatorConfig config = {},
                      std::optional<std::vector<ExtractorDescriptor>> expected = std::nullopt);

  /// Fetches the shard's /info and refuses it (Error(kExtractorMismatch))
  /// when its extractors differ from the federation's. The first shard fixes
  /// the extractors when none were given. Unreachable shards raise
  /// Error(kFederation).
  void register_shard(const std::string& name, std::shared_ptr<ShardClient> client);

  /// Shard name -> reachable.
  std::map<std::string, bool> health_check() const;

  /// Queries every shard concurrently. Shards that fail after retries are
  /// reported in `missing_shards` and the response is marked degraded.
  SearchResponse search(const Query& query) const override;
  nlohmann::json info() const override;

  std::size_t shard_count() const;

 private:
  struct Shard {
    std::string name;
    std::shared_ptr<ShardClient> client;
    bool nested = false;  // the shard is itself an aggregator
  };

  AggregatorConfig config_;
  mutable std::mutex mu_;
  std::optional<std::vector<ExtractorDescriptor>> extractors_;
  std::vector<Shard> shards_;
};

}  // namespace avsearch

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

#include <algorithm>
#include <future>

#include <httplib.h>

#include "avsearch/extract_protocol.hpp"
#include "avsearch/wire.hpp"

namespace avsearch {

namespace {

std::vector<ExtractorDescriptor> extractors_of(const nlohmann::json& info) {
  std::vector<ExtractorDescriptor> out;
  try {
    for (const auto& e : info.at("extractors")) out.push_back(descriptor_from_json(e));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFederation, std::string("shard /info is malformed: ") + e.what());
  }
  return out;
}

struct Endpoint {
  std::string base;
  std::string prefix;
};

Endpoint split_url(const std::string& url) {
  auto scheme = url.find("://");
  auto path = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path == std::string::npos) return {url, ""};
  std::string prefix = url.substr(path);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, path), prefix};
}

}  // namespace

HttpShardClient::HttpShardClient(std::string url, std::chrono::milliseconds timeout)
    : url_(std::move(url)), timeout_(timeout) {}

SearchResponse HttpShardClient::search(const Query& query) const {
  Endpoint ep = split_url(url_);
  httplib::Client client(ep.base);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  auto res = client.Post(ep.prefix + "/search", to_json(query).dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::kFederation, url_ + ": " + httplib::to_string(res.error()));
  }
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kFederation, url_ + ": response is not JSON");
  }
  if (res->status == 400) {
    // The shard rejected the query itself; every shard would.
    throw Error(ErrorCode::kInvalidArgument, body.value("detail", std::string("rejected by shard")));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kFederation, url_ + ": HTTP " + std::to_string(res->status));
  }
  try {
    return response_from_json(body);
  } catch (const Error& e) {
    throw Error(ErrorCode::kFederation, url_ + ": " + e.what());
  }
}

nlohmann::json HttpShardClient::info() const {
  Endpoint ep = split_url(url_);
  httplib::Client client(ep.base);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  auto res = client.Get(ep.prefix + "/info");
  if (!res) throw Error(ErrorCode::kFederation, url_ + ": " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw Error(ErrorCode::kFederation, url_ + "/info: HTTP " + std::to_string(res->status));
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kFederation, url_ + "/info: response is not JSON");
  }
}

bool federated_ranks_before(const ResultHit& a, const ResultHit& b) noexcept {
  if (a.score != b.score) return a.score > b.score;
  if (a.shard != b.shard) return a.shard < b.shard;
  if (a.media_id != b.media_id) return a.media_id < b.media_id;
  return a.t_start.value_or(0.0) < b.t_start.value_or(0.0);
}

SearchResponse merge_responses(std::span<const SearchResponse> responses, std::size_t topk) {
  SearchResponse out;
  for (const SearchResponse& r : responses) {
    out.results.insert(out.results.end(), r.results.begin(), r.results.end());
    out.degraded = out.degraded || r.degraded;
    out.missing_shards.insert(out.missing_shards.end(), r.missing_shards.begin(),
                              r.missing_shards.end());
  }
  std::stable_sort(out.results.begin(), out.results.end(), federated_ranks_before);
  if (out.results.size() > topk) out.results.resize(topk);
  std::sort(out.missing_shards.begin(), out.missing_shards.end());
  out.missing_shards.erase(std::unique(out.missing_shards.begin(), out.missing_shards.end()),
                           out.missing_shards.end());
  return out;
}

Aggregator::Aggregator(AggregatorConfig config,
                       std::optional<std::vector<ExtractorDescriptor>> expected)
    : config_(std::move(config)), extractors_(std::move(expected)) {}

void Aggregator::register_shard(const std::string& name, std::shared_ptr<ShardClient> client) {
  if (!client) throw Error(ErrorCode::kInvalidArgument, "shard client is null");
  nlohmann::json info = client->info();
  std::vector<ExtractorDescriptor> extractors = extractors_of(info);
  std::lock_guard lock(mu_);
  for (const Shard& s : shards_) {
    if (s.name == name) throw Error(ErrorCode::kInvalidArgument, "shard '" + name + "' already registered");
  }
  if (!extractors_) {
    extractors_ = extractors;
  } else if (*extractors_ != extractors) {
    std::string detail;
    for (const auto& e : extractors) detail += " " + describe(e);
    throw Error(ErrorCode::kExtractorMismatch,
                "shard '" + name + "' uses different extractors:" + detail);
  }
  shards_.push_back({name, std::move(client), info.value("role", std::string()) == "aggregator"});
}

std::map<std::string, bool> Aggregator::health_check() const {
  std::vector<Shard> shards;
  {
    std::lock_guard lock(mu_);
    shards = shards_;
  }
  std::map<std::string, bool> out;
  for (const Shard& s : shards) {
    try {
      s.client->info();
      out[s.name] = true;
    } catch (const Error&) {
      out[s.name] = false;
    }
  }
  return out;
}

SearchResponse Aggregator::search(const Query& query) const {
  std::vector<Shard> shards;
  {
    std::lock_guard lock(mu_);
    shards = shards_;
  }
  if (shards.empty()) throw Error(ErrorCode::kFederation, "no shards registered");

  auto ask = [this, &query](const Shard& shard) -> SearchResponse {
    for (int attempt = 0;; ++attempt) {
      try {
        return shard.client->search(query);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kFederation || attempt >= config_.retries) throw;
      }
    }
  };

  std::vector<std::future<SearchResponse>> pending;
  for (const Shard& s : shards) pending.push_back(std::async(std::launch::async, ask, std::cref(s)));

  std::vector<SearchResponse> responses;
  std::vector<std::string> missing;
  std::optional<Error> rejected;
  for (std::size_t i = 0; i < shards.size(); ++i) {
    try {
      SearchResponse r = pending[i].get();
      if (!shards[i].nested) {
        for (ResultHit& h : r.results) h.shard = shards[i].name;
      }
      responses.push_back(std::move(r));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kFederation) {
        missing.push_back(shards[i].name);
      } else if (!rejected) {
        rejected = e;
      }
    }
  }
  if (rejected) throw *rejected;
  if (responses.empty()) throw Error(ErrorCode::kFederation, "no shard responded");
  SearchResponse out = merge_responses(responses, query.topk);
  if (!missing.empty()) {
    out.degraded = true;
    out.missing_shards.insert(out.missing_shards.end(), missing.begin(), missing.end());
    std::sort(out.missing_shards.begin(), out.missing_shards.end());
  }
  return out;
}

nlohmann::json Aggregator::info() const {
  std::lock_guard lock(mu_);
  nlohmann::json shards = nlohmann::json::array();
  for (const Shard& s : shards_) shards.push_back({{"name", s.name}, {"nested", s.nested}});
  nlohmann::json extractors = nlohmann::json::array();
  if (extractors_) {
    for (const auto& e : *extractors_) extractors.push_back(to_json(e));
  }
  return {{"role", "aggregator"}, {"shard", config_.name}, {"shards", std::move(shards)},
          {"extractors", std::move(extractors)}};
}

std::size_t Aggregator::shard_count() const {
  std::lock_guard lock(mu_);
  return shards_.size();
}

}  // namespace avsearch

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

#include <charconv>

#include "avsearch/text.hpp"

namespace avsearch {

namespace {

constexpr std::size_t kMaxTopk = 10000;

[[noreturn]] void bad_request(const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, what);
}

QueryModality modality_from(const std::string& name) {
  auto m = parse_query_modality(name);
  if (!m) bad_request("unknown modality '" + name + "'");
  return *m;
}

std::size_t topk_from(long long v) {
  if (v < 0 || static_cast<unsigned long long>(v) > kMaxTopk) {
    bad_request("topk must lie in [0, " + std::to_string(kMaxTopk) + "]");
  }
  return static_cast<std::size_t>(v);
}

double alpha_from(double a) {
  if (!(a >= 0.0 && a <= 1.0)) bad_request("alpha must lie in [0, 1]");
  return a;
}

MetadataFilter filter_from_token(const std::string& token) {
  auto colon = token.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 >= token.size()) {
    bad_request("filter must look like field:value");
  }
  return {token.substr(0, colon), token.substr(colon + 1)};
}

}  // namespace

nlohmann::json to_json(const Query& query) {
  nlohmann::json j{{"modality", to_string(query.modality)}, {"topk", query.topk}};
  if (query.text) j["q"] = *query.text;
  if (query.compose_text) j["compose_text"] = *query.compose_text;
  if (query.alpha) j["alpha"] = *query.alpha;
  if (!query.filters.empty()) {
    nlohmann::json filters = nlohmann::json::array();
    for (const auto& f : query.filters) filters.push_back({{"field", f.field}, {"value", f.value}});
    j["filters"] = std::move(filters);
  }
  if (query.exemplar) {
    j["exemplar"] = {{"kind", to_string(query.exemplar->kind)},
                     {"data", base64_encode(query.exemplar->bytes)}};
  }
  return j;
}

Query query_from_json(const nlohmann::json& j) {
  if (!j.is_object()) bad_request("search request must be a JSON object");
  Query q;
  try {
    if (j.contains("modality")) q.modality = modality_from(j.at("modality").get<std::string>());
    if (j.contains("q") && !j.at("q").is_null()) q.text = j.at("q").get<std::string>();
    if (j.contains("compose_text") && !j.at("compose_text").is_null()) {
      q.compose_text = j.at("compose_text").get<std::string>();
    }
    if (j.contains("alpha") && !j.at("alpha").is_null()) q.alpha = alpha_from(j.at("alpha").get<double>());
    if (j.contains("topk")) q.topk = topk_from(j.at("topk").get<long long>());
    if (j.contains("filters")) {
      const auto& f = j.at("filters");
      if (f.is_object()) {
        for (const auto& [field, value] : f.items()) q.filters.push_back({field, value.get<std::string>()});
      } else {
        for (const auto& item : f) {
          q.filters.push_back({item.at("field").get<std::string>(), item.at("value").get<std::string>()});
        }
      }
    }
    if (j.contains("exemplar") && !j.at("exemplar").is_null()) {
      const auto& e = j.at("exemplar");
      Exemplar ex;
      auto kind = parse_payload_kind(e.value("kind", std::string("image")));
      if (!kind) bad_request("unknown exemplar kind");
      ex.kind = *kind;
      ex.bytes = ex.kind == PayloadKind::kText ? e.at("data").get<std::string>()
                                               : base64_decode(e.at("data").get<std::string>());
      q.exemplar = std::move(ex);
    }
  } catch (const nlohmann::json::exception& e) {
    bad_request(std::string("malformed search request: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kFormat) bad_request(e.what());
    throw;
  }
  return q;
}

Query query_from_params(const std::vector<std::pair<std::string, std::string>>& params) {
  Query q;
  for (const auto& [key, value] : params) {
    if (key == "q") {
      q.text = value;
    } else if (key == "modality") {
      q.modality = modality_from(value);
    } else if (key == "topk") {
      long long v = 0;
      auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc() || p != value.data() + value.size()) bad_request("topk must be an integer");
      q.topk = topk_from(v);
    } else if (key == "alpha") {
      try {
        std::size_t used = 0;
        double a = std::stod(value, &used);
        if (used != value.size()) bad_request("alpha must be a number");
        q.alpha = alpha_from(a);
      } catch (const std::logic_error&) {
        bad_request("alpha must be a number");
      }
    } else if (key == "compose_text") {
      q.compose_text = value;
    } else if (key == "filter") {
      q.filters.push_back(filter_from_token(value));
    }
  }
  return q;
}

nlohmann::json to_json(const ResultHit& hit) {
  nlohmann::json j{{"media_id", hit.media_id}, {"name", hit.name}, {"score", hit.score},
                   {"shard", hit.shard}};
  if (hit.t_start) j["t_start"] = *hit.t_start;
  if (hit.t_end) j["t_end"] = *hit.t_end;
  if (hit.bbox) j["bbox"] = {hit.bbox->x0, hit.bbox->y0, hit.bbox->x1, hit.bbox->y1};
  if (hit.snippet) j["snippet"] = *hit.snippet;
  if (hit.support) j["support"] = *hit.support;
  return j;
}

ResultHit result_from_json(const nlohmann::json& j) {
  ResultHit r;
  r.media_id = j.at("media_id").get<MediaId>();
  r.name = j.value("name", std::string());
  r.score = j.at("score").get<double>();
  r.shard = j.value("shard", std::string());
  if (j.contains("t_start")) r.t_start = j.at("t_start").get<double>();
  if (j.contains("t_end")) r.t_end = j.at("t_end").get<double>();
  if (j.contains("bbox")) {
    const auto& b = j.at("bbox");
    r.bbox = BoundingBox{b.at(0).get<float>(), b.at(1).get<float>(), b.at(2).get<float>(),
                         b.at(3).get<float>()};
  }
  if (j.contains("snippet")) r.snippet = j.at("snippet").get<std::string>();
  if (j.contains("support")) r.support = j.at("support").get<std::size_t>();
  return r;
}

nlohmann::json to_json(const SearchResponse& response) {
  nlohmann::json results = nlohmann::json::array();
  for (const ResultHit& r : response.results) results.push_back(to_json(r));
  return {{"results", std::move(results)},
          {"degraded", response.degraded},
          {"missing_shards", response.missing_shards}};
}

SearchResponse response_from_json(const nlohmann::json& j) {
  SearchResponse r;
  try {
    for (const auto& item : j.at("results")) r.results.push_back(result_from_json(item));
    r.degraded = j.value("degraded", false);
    if (j.contains("missing_shards")) r.missing_shards = j.at("missing_shards").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("malformed search response: ") + e.what());
  }
  return r;
}

}  // namespace avsearch

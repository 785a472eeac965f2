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

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "avsearch/query_engine.hpp"

namespace avsearch {

// JSON forms of /search requests and responses.
//
// Request:
//   {"modality": "scene", "q": "...", "topk": 10, "alpha": 0.5,
//    "compose_text": "...", "filters": [{"field": "country", "value": "Germany"}],
//    "exemplar": {"kind": "image", "data": "<base64>"}}
// Response:
//   {"results": [{"media_id", "name", "score", "t_start", "t_end",
//                 "bbox": [x0, y0, x1, y1], "snippet", "support", "shard"}],
//    "degraded": false, "missing_shards": []}
// Optional members are omitted when absent.

nlohmann::json to_json(const Query& query);
/// Throws Error(kInvalidArgument) on malformed requests.
Query query_from_json(const nlohmann::json& j);

/// Query from URL parameters: q, modality, topk, alpha, compose_text and
/// repeated filter=field:value.
Query query_from_params(const std::vector<std::pair<std::string, std::string>>& params);

nlohmann::json to_json(const ResultHit& hit);
ResultHit result_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SearchResponse& response);
SearchResponse response_from_json(const nlohmann::json& j);

}  // namespace avsearch

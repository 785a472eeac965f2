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

#include <memory>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "avsearch/extract.hpp"
#include "avsearch/ingest.hpp"
#include "avsearch/project.hpp"
#include "avsearch/query_engine.hpp"
#include "test_support.hpp"

namespace avsearch::testing {

inline void write_wisedesc(const std::filesystem::path& root, const std::string& name,
                           const nlohmann::json& doc) {
  write_json(root / (name + ".wisedesc"), doc);
}

// Tokens whose reference-extractor buckets are pairwise distinct in every
// embedding space, so unrelated tokens never score above zero.
inline std::vector<std::string> distinct_vocabulary(const ReferenceExtractor& extractor, std::size_t n,
                                                    const std::string& prefix = "w") {
  std::vector<std::string> out;
  std::set<std::uint32_t> text_used, face_used;
  for (std::size_t i = 0; out.size() < n; ++i) {
    std::string token = prefix + std::to_string(i);
    auto t = extractor.bucket(Modality::kScene, token);
    auto f = extractor.bucket(Modality::kFace, token);
    if (text_used.count(t) || face_used.count(f)) continue;
    text_used.insert(t);
    face_used.insert(f);
    out.push_back(token);
  }
  return out;
}

inline Catalog scan_catalog(const std::filesystem::path& root, const SamplingConfig& sampling = {}) {
  Catalog c;
  c.sampling = sampling;
  c.items = scan_media(root).items;
  return c;
}

// Builds an in-memory engine over every `.wisedesc` file under `root`.
inline std::shared_ptr<Engine> engine_for(const std::filesystem::path& root,
                                          std::shared_ptr<const Extractor> extractor,
                                          ProjectConfig config = {}, EngineConfig engine = {}) {
  auto data = build_node_data(scan_catalog(root, config.sampling), *extractor, config);
  return std::make_shared<Engine>(std::move(data), std::move(extractor), engine);
}

inline Exemplar face_exemplar(const std::string& identity) {
  nlohmann::json doc = {{"kind", "image"},
                        {"faces", {{{"identity", identity}, {"bbox", {0.1, 0.1, 0.5, 0.5}}}}}};
  return {PayloadKind::kImage, doc.dump()};
}

inline Exemplar scene_exemplar(const std::string& text) {
  nlohmann::json doc = {{"kind", "image"}, {"scene_text", {{{"start", 0}, {"text", text}}}}};
  return {PayloadKind::kImage, doc.dump()};
}

}  // namespace avsearch::testing

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

#include "avsearch/fts.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace avsearch {

void FtsIndex::add(DocId doc_id, const Metadata& fields) {
  if (!docs_.emplace(doc_id, fields).second) {
    throw Error(ErrorCode::kInvalidArgument, "document " + std::to_string(doc_id) + " already indexed");
  }
  for (const auto& [field, text] : fields) {
    std::map<std::string, std::uint32_t> counts;
    for (std::string& term : tokenize(text)) ++counts[std::move(term)];
    for (auto& [term, tf] : counts) {
      auto& list = postings_[term];
      Posting p{doc_id, field, tf};
      auto at = std::lower_bound(list.begin(), list.end(), p, [](const Posting& a, const Posting& b) {
        return a.doc_id < b.doc_id || (a.doc_id == b.doc_id && a.field < b.field);
      });
      list.insert(at, std::move(p));
    }
  }
}

const std::vector<Posting>& FtsIndex::postings(const std::string& term) const {
  static const std::vector<Posting> kEmpty;
  auto it = postings_.find(term);
  return it == postings_.end() ? kEmpty : it->second;
}

std::vector<FtsHit> FtsIndex::query(std::string_view text,
                                    std::optional<std::string_view> field) const {
  std::vector<std::string> tokens = tokenize(text);
  if (tokens.empty()) throw Error(ErrorCode::kEmptyQuery, "full-text query has no terms");
  std::set<std::string> terms(tokens.begin(), tokens.end());

  const double n_docs = static_cast<double>(docs_.size());
  std::unordered_map<DocId, double> scores;
  bool first = true;
  for (const std::string& term : terms) {
    // Per-document tf within the query scope.
    std::map<DocId, std::uint32_t> tf;
    for (const Posting& p : postings(term)) {
      if (!field || p.field == *field) tf[p.doc_id] += p.term_frequency;
    }
    if (tf.empty()) return {};
    const double idf = std::log(1.0 + n_docs / static_cast<double>(tf.size()));

    std::unordered_map<DocId, double> next;
    for (const auto& [doc, f] : tf) {
      if (first) {
        next.emplace(doc, f * idf);
      } else if (auto it = scores.find(doc); it != scores.end()) {
        next.emplace(doc, it->second + f * idf);
      }
    }
    scores = std::move(next);
    first = false;
    if (scores.empty()) return {};
  }

  std::vector<FtsHit> hits;
  hits.reserve(scores.size());
  for (const auto& [doc, score] : scores) hits.push_back({doc, score});
  std::sort(hits.begin(), hits.end(), [](const FtsHit& a, const FtsHit& b) {
    return a.score > b.score || (a.score == b.score && a.doc_id < b.doc_id);
  });
  return hits;
}

void save_fts(const FtsIndex& index, const std::filesystem::path& path) {
  nlohmann::json docs = nlohmann::json::array();
  for (const auto& [id, fields] : index.docs()) docs.push_back({{"id", id}, {"fields", fields}});
  nlohmann::json doc{{"format", "avsearch-fts"}, {"version", kFtsFormatVersion}, {"docs", std::move(docs)}};
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out << doc.dump();
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot publish " + path.string() + ": " + ec.message());
}

FtsIndex load_fts(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open full-text index " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  FtsIndex index;
  try {
    auto doc = nlohmann::json::parse(buffer.str());
    if (doc.at("format") != "avsearch-fts" || doc.at("version").get<int>() != kFtsFormatVersion) {
      throw Error(ErrorCode::kFormat, path.string() + " is not a supported full-text index");
    }
    for (const auto& d : doc.at("docs")) {
      index.add(d.at("id").get<DocId>(), d.at("fields").get<Metadata>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, "corrupt full-text index " + path.string() + ": " + e.what());
  }
  return index;
}

}  // namespace avsearch

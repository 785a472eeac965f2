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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "avsearch/media.hpp"
#include "avsearch/text.hpp"

namespace avsearch {

using DocId = std::uint64_t;

struct FtsHit {
  DocId doc_id = 0;
  double score = 0.0;

  friend bool operator==(const FtsHit&, const FtsHit&) = default;
};

struct Posting {
  DocId doc_id = 0;
  std::string field;
  std::uint32_t term_frequency = 0;

  friend bool operator==(const Posting&, const Posting&) = default;
};

// Inverted index over documents made of named text fields. Matching is
// conjunctive: a document matches when every distinct query term occurs in it
// (in the named field, for field-scoped queries). Each term contributes
// tf * ln(1 + N / df) to the score, with tf and df counted in the same scope
// as the query. No stemming or stop words.
class FtsIndex {
 public:
  /// Throws Error(kInvalidArgument) if `doc_id` was already added.
  void add(DocId doc_id, const Metadata& fields);

  /// Sorted by score descending, then doc id ascending. Throws
  /// Error(kEmptyQuery) when `text` has no tokens; an unknown field simply
  /// matches nothing.
  std::vector<FtsHit> query(std::string_view text,
                            std::optional<std::string_view> field = std::nullopt) const;

  std::size_t size() const noexcept { return docs_.size(); }
  const std::map<DocId, Metadata>& docs() const noexcept { return docs_; }
  /// Postings for `term`, sorted by (doc id, field); empty if absent.
  const std::vector<Posting>& postings(const std::string& term) const;

  friend bool operator==(const FtsIndex& a, const FtsIndex& b) { return a.docs_ == b.docs_; }

 private:
  std::map<std::string, std::vector<Posting>> postings_;
  std::map<DocId, Metadata> docs_;
};

inline constexpr int kFtsFormatVersion = 1;

// Stored as the source documents; postings are rebuilt on load, which is
// deterministic.
void save_fts(const FtsIndex& index, const std::filesystem::path& path);
FtsIndex load_fts(const std::filesystem::path& path);

}  // namespace avsearch

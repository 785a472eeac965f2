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

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "avsearch/extract.hpp"
#include "avsearch/ingest.hpp"
#include "avsearch/query_engine.hpp"
#include "avsearch/vector_index.hpp"

namespace avsearch {

struct ExtractorConfig {
  std::string type = "reference";  // "reference" or "remote"
  std::string endpoint;            // remote only
  std::uint32_t dim = 256;         // reference only
  std::uint64_t seed = ReferenceExtractorOptions{}.seed;
};

struct IndexConfig {
  std::string kind = "auto";  // auto, flat, ivf-flat or ivf-pq
  std::size_t nlist = 0;
  std::size_t nprobe = 0;
  std::size_t m = 8;
  std::size_t ks = 256;
  /// "auto" switches from flat to an IVF index at this many vectors.
  std::size_t auto_ivf_threshold = 20000;
};

struct ProjectConfig {
  std::filesystem::path media_root;
  SamplingConfig sampling;
  ExtractorConfig extractor;
  IndexConfig index;
  EngineConfig engine;
  /// Region detections below this score are not indexed.
  double region_score_threshold = 0.1;
  std::size_t workers = 1;
};

nlohmann::json to_json(const ProjectConfig& config);
/// Throws Error(kConfig) on invalid values.
ProjectConfig project_config_from_json(const nlohmann::json& j);

// Project directory layout.
struct ProjectLayout {
  std::filesystem::path root;

  std::filesystem::path config() const { return root / "config.json"; }
  std::filesystem::path catalog() const { return root / "catalog.json"; }
  std::filesystem::path store(Modality m) const;
  std::filesystem::path index(Modality m) const;
  std::filesystem::path metadata_fts() const { return root / "fts" / "metadata.json"; }
  std::filesystem::path transcripts() const { return root / "fts" / "transcripts.json"; }
  std::filesystem::path logs() const { return root / "logs"; }
};

/// Creates the directory layout and config.json. Throws Error(kConfig) if a
/// project already exists there.
void init_project(const std::filesystem::path& dir, const ProjectConfig& config);
ProjectConfig load_project_config(const std::filesystem::path& dir);
void save_project_config(const std::filesystem::path& dir, const ProjectConfig& config);

std::unique_ptr<Extractor> make_extractor(const ExtractorConfig& config);

/// Index kind chosen for a modality holding `n` vectors.
IndexParams index_params_for(const IndexConfig& config, Modality modality, std::size_t n);

struct IndexReport {
  std::size_t new_items = 0;
  std::size_t removed_items = 0;
  std::size_t unchanged_items = 0;
  std::size_t failed_items = 0;
  std::vector<ScanWarning> warnings;
  std::size_t vectors[4] = {0, 0, 0, 0};
};

using ProgressFn = std::function<void(const std::string&)>;

/// Scans the media root, extracts features for new or changed media, and
/// rebuilds indices. Media whose path, size and modification time are
/// unchanged keep their embeddings, so a second run over the same files
/// reports no new items. Per-item extraction failures are reported and the
/// item is retried on the next run; an unreachable extractor aborts with
/// Error(kExtractorUnreachable).
IndexReport index_project(const std::filesystem::path& dir, const Extractor& extractor,
                          const ProgressFn& progress = {});

/// Loads everything a node serves. Throws Error(kExtractorMismatch) when the
/// stored indices were built by a different extractor.
std::shared_ptr<NodeData> load_node_data(const std::filesystem::path& dir,
                                         const Extractor& extractor);

/// Builds NodeData in memory from a catalog plus extraction, without touching
/// disk. Used by index_project and tests.
std::shared_ptr<NodeData> build_node_data(Catalog catalog, const Extractor& extractor,
                                          const ProjectConfig& config,
                                          IndexReport* report = nullptr);

}  // namespace avsearch

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

#include "avsearch/project.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "avsearch/extract_protocol.hpp"
#include "avsearch/fts.hpp"
#include "avsearch/store.hpp"
#include "avsearch/synthetic.hpp"

namespace avsearch {

namespace {

constexpr std::size_t kModalityCount = std::size(kAllModalities);

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return nlohmann::json::parse(buffer.str());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out << j.dump(2) << '\n';
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot publish " + path.string() + ": " + ec.message());
}

struct ItemFeatures {
  std::array<std::vector<std::pair<EmbeddingRecord, Embedding>>, kModalityCount> records;
  std::vector<TranscriptRecord> transcripts;
  std::optional<std::string> error;
};

void add_detections(std::vector<std::pair<EmbeddingRecord, Embedding>>& out, const MediaItem& item,
                    std::span<const Frame> frames,
                    const std::vector<std::vector<RegionDetection>>& detections, double interval,
                    double min_score) {
  for (std::size_t i = 0; i < frames.size() && i < detections.size(); ++i) {
    for (const RegionDetection& d : detections[i]) {
      if (d.score < min_score) continue;
      EmbeddingRecord rec;
      rec.media_id = item.id;
      rec.t_start = frames[i].timestamp_sec;
      rec.t_end = item.kind == MediaKind::kImage ? rec.t_start
                                                 : std::min(rec.t_start + interval, item.duration_sec);
      rec.bbox = d.bbox;
      rec.detection_score = d.score;
      out.emplace_back(rec, d.embedding);
    }
  }
}

ItemFeatures extract_item(const MediaItem& item, const ProjectConfig& config,
                          const Extractor& extractor) {
  ItemFeatures f;
  std::optional<SyntheticMedia> synthetic;
  if (item.path.extension() == kSyntheticExtension) synthetic = load_synthetic(item.path);
  MediaSource source{&item, synthetic ? &*synthetic : nullptr};
  const double interval = config.sampling.frame_interval_sec();

  if (item.kind != MediaKind::kAudio) {
    std::vector<Frame> frames = sample_frames(item, config.sampling);
    auto scene = extractor.embed_frames(source, frames);
    for (std::size_t i = 0; i < frames.size() && i < scene.size(); ++i) {
      if (!scene[i]) continue;
      EmbeddingRecord rec;
      rec.media_id = item.id;
      rec.t_start = frames[i].timestamp_sec;
      rec.t_end = item.kind == MediaKind::kImage ? rec.t_start
                                                 : std::min(rec.t_start + interval, item.duration_sec);
      f.records[static_cast<std::size_t>(Modality::kScene)].emplace_back(rec, std::move(*scene[i]));
    }
    add_detections(f.records[static_cast<std::size_t>(Modality::kRegion)], item, frames,
                   extractor.detect_regions(source, frames), interval, config.region_score_threshold);
    add_detections(f.records[static_cast<std::size_t>(Modality::kFace)], item, frames,
                   extractor.detect_faces(source, frames), interval, 0.0);
  }
  if (item.has_audio) {
    std::vector<AudioWindow> windows = sample_audio_windows(item, config.sampling);
    auto audio = extractor.embed_audio_windows(source, windows);
    for (std::size_t i = 0; i < windows.size() && i < audio.size(); ++i) {
      if (!audio[i]) continue;
      EmbeddingRecord rec;
      rec.media_id = item.id;
      rec.t_start = windows[i].start_sec;
      rec.t_end = windows[i].end_sec;
      f.records[static_cast<std::size_t>(Modality::kAudio)].emplace_back(rec, std::move(*audio[i]));
    }
    for (TranscriptSegment& s : validate_transcript(extractor.transcribe(source))) {
      f.transcripts.push_back({item.id, s.start_sec, s.end_sec, std::move(s.text)});
    }
  }
  return f;
}

// Extracts features for `items` on a bounded pool. Results keep item order.
std::vector<ItemFeatures> extract_all(std::span<const MediaItem> items, const ProjectConfig& config,
                                      const Extractor& extractor, const ProgressFn& progress) {
  std::vector<ItemFeatures> out(items.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::exception_ptr fatal;
  std::mutex mu;
  auto work = [&] {
    for (;;) {
      {
        std::lock_guard lock(mu);
        if (fatal) return;
      }
      std::size_t i = next.fetch_add(1);
      if (i >= items.size()) return;
      try {
        out[i] = extract_item(items[i], config, extractor);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kExtractorUnreachable || e.code() == ErrorCode::kExtractorMismatch) {
          std::lock_guard lock(mu);
          if (!fatal) fatal = std::current_exception();
          return;
        }
        out[i] = ItemFeatures{};
        out[i].error = e.what();
      }
      std::size_t n = done.fetch_add(1) + 1;
      if (progress && (n % 100 == 0 || n == items.size())) {
        std::lock_guard lock(mu);
        progress("extracted " + std::to_string(n) + "/" + std::to_string(items.size()) + " items");
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(config.workers, 1, std::max<std::size_t>(1, items.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  if (fatal) std::rethrow_exception(fatal);
  return out;
}

void fill_samples(Catalog& catalog) {
  catalog.frames.clear();
  catalog.windows.clear();
  std::sort(catalog.items.begin(), catalog.items.end(),
            [](const MediaItem& a, const MediaItem& b) { return a.id < b.id; });
  for (const MediaItem& item : catalog.items) {
    if (item.kind != MediaKind::kAudio) {
      auto frames = sample_frames(item, catalog.sampling);
      catalog.frames.insert(catalog.frames.end(), frames.begin(), frames.end());
    }
    if (item.has_audio) {
      auto windows = sample_audio_windows(item, catalog.sampling);
      catalog.windows.insert(catalog.windows.end(), windows.begin(), windows.end());
    }
  }
}

std::shared_ptr<NodeData> assemble(Catalog catalog, std::array<EmbeddingStore, kModalityCount> stores,
                                   std::vector<TranscriptRecord> transcripts, const ProjectConfig& config,
                                   std::array<std::unique_ptr<VectorIndex>, kModalityCount> indices = {}) {
  auto node = std::make_shared<NodeData>();
  node->catalog = std::move(catalog);
  for (Modality m : kAllModalities) {
    const auto slot = static_cast<std::size_t>(m);
    EmbeddingStore& store = stores[slot];
    std::unique_ptr<VectorIndex> index = std::move(indices[slot]);
    if (!index) {
      std::vector<RecordId> ids = store.ids();
      index = build_index(index_params_for(config.index, m, store.size()), store.extractor(), ids,
                          store.vectors());
    }
    node->modalities[slot] = ModalityIndex{std::move(store), std::move(index)};
  }
  for (const MediaItem& item : node->catalog.items) node->metadata_fts.add(item.id, item.metadata);
  std::sort(transcripts.begin(), transcripts.end(), [](const TranscriptRecord& a, const TranscriptRecord& b) {
    return a.media_id < b.media_id || (a.media_id == b.media_id && a.start_sec < b.start_sec);
  });
  for (std::size_t i = 0; i < transcripts.size(); ++i) {
    node->transcript_fts.add(i, {{"text", transcripts[i].text}});
  }
  node->transcripts = std::move(transcripts);
  return node;
}

std::vector<TranscriptRecord> load_transcripts(const std::filesystem::path& path) {
  std::vector<TranscriptRecord> out;
  nlohmann::json j = read_json(path);
  try {
    if (j.at("format") != "avsearch-transcripts" || j.at("version") != 1) {
      throw Error(ErrorCode::kFormat, path.string() + " is not a transcript file");
    }
    for (const auto& r : j.at("records")) {
      out.push_back({r.at("media_id").get<MediaId>(), r.at("start").get<double>(),
                     r.at("end").get<double>(), r.at("text").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
  return out;
}

void save_transcripts(const std::filesystem::path& path, std::span<const TranscriptRecord> records) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& r : records) {
    list.push_back({{"media_id", r.media_id}, {"start", r.start_sec}, {"end", r.end_sec}, {"text", r.text}});
  }
  write_json(path, {{"format", "avsearch-transcripts"}, {"version", 1}, {"records", std::move(list)}});
}

std::filesystem::path media_root_of(const std::filesystem::path& dir, const ProjectConfig& config) {
  return config.media_root.is_absolute() ? config.media_root : dir / config.media_root;
}

}  // namespace

nlohmann::json to_json(const ProjectConfig& c) {
  return {{"format", "avsearch-project"},
          {"version", 1},
          {"media_root", c.media_root.string()},
          {"sampling", {{"fps", c.sampling.frame_rate_fps}, {"window_sec", c.sampling.window_sec},
                        {"overlap_sec", c.sampling.overlap_sec}}},
          {"extractor", {{"type", c.extractor.type}, {"endpoint", c.extractor.endpoint},
                         {"dim", c.extractor.dim}, {"seed", c.extractor.seed}}},
          {"index", {{"kind", c.index.kind}, {"nlist", c.index.nlist}, {"nprobe", c.index.nprobe},
                     {"m", c.index.m}, {"ks", c.index.ks},
                     {"auto_ivf_threshold", c.index.auto_ivf_threshold}}},
          {"search", {{"face_threshold", c.engine.face_threshold},
                      {"min_similarity", c.engine.min_similarity},
                      {"alpha", c.engine.default_alpha},
                      {"frame_gap_intervals", c.engine.frame_gap_intervals},
                      {"candidate_depth", c.engine.candidate_depth},
                      {"nprobe", c.engine.search.nprobe},
                      {"shard_name", c.engine.shard_name}}},
          {"region_score_threshold", c.region_score_threshold},
          {"workers", c.workers}};
}

ProjectConfig project_config_from_json(const nlohmann::json& j) {
  ProjectConfig c;
  try {
    if (j.value("format", std::string("avsearch-project")) != "avsearch-project") {
      throw Error(ErrorCode::kConfig, "not an avsearch project config");
    }
    c.media_root = j.value("media_root", std::string());
    if (j.contains("sampling")) {
      const auto& s = j.at("sampling");
      c.sampling.frame_rate_fps = s.value("fps", c.sampling.frame_rate_fps);
      c.sampling.window_sec = s.value("window_sec", c.sampling.window_sec);
      c.sampling.overlap_sec = s.value("overlap_sec", c.sampling.overlap_sec);
    }
    if (j.contains("extractor")) {
      const auto& e = j.at("extractor");
      c.extractor.type = e.value("type", c.extractor.type);
      c.extractor.endpoint = e.value("endpoint", c.extractor.endpoint);
      c.extractor.dim = e.value("dim", c.extractor.dim);
      c.extractor.seed = e.value("seed", c.extractor.seed);
    }
    if (j.contains("index")) {
      const auto& i = j.at("index");
      c.index.kind = i.value("kind", c.index.kind);
      c.index.nlist = i.value("nlist", c.index.nlist);
      c.index.nprobe = i.value("nprobe", c.index.nprobe);
      c.index.m = i.value("m", c.index.m);
      c.index.ks = i.value("ks", c.index.ks);
      c.index.auto_ivf_threshold = i.value("auto_ivf_threshold", c.index.auto_ivf_threshold);
    }
    if (j.contains("search")) {
      const auto& s = j.at("search");
      c.engine.face_threshold = s.value("face_threshold", c.engine.face_threshold);
      c.engine.min_similarity = s.value("min_similarity", c.engine.min_similarity);
      c.engine.default_alpha = s.value("alpha", c.engine.default_alpha);
      c.engine.frame_gap_intervals = s.value("frame_gap_intervals", c.engine.frame_gap_intervals);
      c.engine.candidate_depth = s.value("candidate_depth", c.engine.candidate_depth);
      c.engine.search.nprobe = s.value("nprobe", c.engine.search.nprobe);
      c.engine.shard_name = s.value("shard_name", c.engine.shard_name);
    }
    c.region_score_threshold = j.value("region_score_threshold", c.region_score_threshold);
    c.workers = j.value("workers", c.workers);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("invalid project config: ") + e.what());
  }
  c.sampling.validate();
  if (c.extractor.type != "reference" && c.extractor.type != "remote") {
    throw Error(ErrorCode::kConfig, "extractor type must be 'reference' or 'remote'");
  }
  if (c.extractor.type == "remote" && c.extractor.endpoint.empty()) {
    throw Error(ErrorCode::kConfig, "remote extractor needs an endpoint");
  }
  if (c.index.kind != "auto" && !parse_index_kind(c.index.kind)) {
    throw Error(ErrorCode::kConfig, "unknown index kind '" + c.index.kind + "'");
  }
  if (!(c.engine.default_alpha >= 0.0 && c.engine.default_alpha <= 1.0)) {
    throw Error(ErrorCode::kConfig, "alpha must lie in [0, 1]");
  }
  if (c.engine.candidate_depth == 0) throw Error(ErrorCode::kConfig, "candidate_depth must be positive");
  if (c.workers == 0) throw Error(ErrorCode::kConfig, "workers must be positive");
  return c;
}

std::filesystem::path ProjectLayout::store(Modality m) const {
  return root / "store" / (std::string(to_string(m)) + ".vec");
}

std::filesystem::path ProjectLayout::index(Modality m) const {
  return root / "indices" / (std::string(to_string(m)) + ".idx");
}

void init_project(const std::filesystem::path& dir, const ProjectConfig& config) {
  ProjectLayout layout{dir};
  if (std::filesystem::exists(layout.config())) {
    throw Error(ErrorCode::kConfig, "a project already exists in " + dir.string());
  }
  // Round-trip through JSON so invalid settings are refused up front.
  project_config_from_json(to_json(config));
  std::error_code ec;
  for (const char* sub : {"store", "indices", "fts", "logs"}) {
    std::filesystem::create_directories(dir / sub, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + (dir / sub).string() + ": " + ec.message());
  }
  write_json(layout.config(), to_json(config));
}

ProjectConfig load_project_config(const std::filesystem::path& dir) {
  ProjectLayout layout{dir};
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "project directory " + dir.string() + " does not exist");
  }
  if (!std::filesystem::exists(layout.config())) {
    throw Error(ErrorCode::kConfig, "no project in " + dir.string() + " (run init first)");
  }
  nlohmann::json j;
  try {
    j = read_json(layout.config());
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  return project_config_from_json(j);
}

void save_project_config(const std::filesystem::path& dir, const ProjectConfig& config) {
  project_config_from_json(to_json(config));
  write_json(ProjectLayout{dir}.config(), to_json(config));
}

std::unique_ptr<Extractor> make_extractor(const ExtractorConfig& config) {
  if (config.type == "reference") {
    return std::make_unique<ReferenceExtractor>(ReferenceExtractorOptions{config.dim, config.seed});
  }
  if (config.type == "remote") {
    RemoteEndpoint endpoint;
    endpoint.url = config.endpoint;
    return std::make_unique<RemoteExtractor>(endpoint);
  }
  throw Error(ErrorCode::kConfig, "unknown extractor type '" + config.type + "'");
}

IndexParams index_params_for(const IndexConfig& config, Modality modality, std::size_t n) {
  IndexParams p;
  p.nlist = config.nlist;
  p.nprobe = config.nprobe;
  p.m = config.m;
  p.ks = config.ks;
  if (config.kind == "auto") {
    if (n < config.auto_ivf_threshold) {
      p.kind = IndexKind::kFlat;
    } else {
      p.kind = modality == Modality::kRegion ? IndexKind::kIvfPq : IndexKind::kIvfFlat;
    }
  } else {
    p.kind = *parse_index_kind(config.kind);
  }
  return p;
}

std::shared_ptr<NodeData> build_node_data(Catalog catalog, const Extractor& extractor,
                                          const ProjectConfig& config, IndexReport* report) {
  catalog.sampling = config.sampling;
  std::vector<ItemFeatures> features = extract_all(catalog.items, config, extractor, {});
  std::array<EmbeddingStore, kModalityCount> stores;
  for (Modality m : kAllModalities) stores[static_cast<std::size_t>(m)] = EmbeddingStore(extractor.descriptor(m));
  std::vector<TranscriptRecord> transcripts;
  std::vector<MediaItem> kept;
  for (std::size_t i = 0; i < catalog.items.size(); ++i) {
    if (features[i].error) {
      if (report) {
        ++report->failed_items;
        report->warnings.push_back({catalog.items[i].path, *features[i].error});
      }
      continue;
    }
    kept.push_back(catalog.items[i]);
    for (std::size_t s = 0; s < kModalityCount; ++s) {
      for (auto& [rec, emb] : features[i].records[s]) stores[s].append(rec, emb);
    }
    transcripts.insert(transcripts.end(), features[i].transcripts.begin(), features[i].transcripts.end());
  }
  catalog.items = std::move(kept);
  fill_samples(catalog);
  if (report) {
    report->new_items += catalog.items.size();
    for (std::size_t s = 0; s < kModalityCount; ++s) report->vectors[s] = stores[s].size();
  }
  return assemble(std::move(catalog), std::move(stores), std::move(transcripts), config);
}

IndexReport index_project(const std::filesystem::path& dir, const Extractor& extractor,
                          const ProgressFn& progress) {
  const ProjectConfig config = load_project_config(dir);
  const ProjectLayout layout{dir};
  auto say = [&](const std::string& msg) {
    if (progress) progress(msg);
  };

  if (config.media_root.empty()) {
    throw Error(ErrorCode::kConfig, "no media root configured for " + dir.string());
  }
  IndexReport report;
  ScanResult scan = scan_media(media_root_of(dir, config), config.workers);
  report.warnings = scan.warnings;
  say("found " + std::to_string(scan.items.size()) + " media files");

  Catalog old;
  old.sampling = config.sampling;
  std::array<EmbeddingStore, kModalityCount> stores;
  std::vector<TranscriptRecord> transcripts;
  bool reuse = std::filesystem::exists(layout.catalog());
  if (reuse) {
    old = load_catalog(layout.catalog());
    for (Modality m : kAllModalities) {
      const auto s = static_cast<std::size_t>(m);
      if (!std::filesystem::exists(layout.store(m))) {
        reuse = false;
        break;
      }
      stores[s] = load_store(layout.store(m));
      if (stores[s].extractor() != extractor.descriptor(m)) {
        say("extractor changed for " + std::string(to_string(m)) + "; re-extracting everything");
        reuse = false;
      }
    }
    if (reuse && std::filesystem::exists(layout.transcripts())) {
      transcripts = load_transcripts(layout.transcripts());
    }
    if (old.sampling != config.sampling) {
      say("sampling changed; re-extracting everything");
      reuse = false;
    }
  }
  if (!reuse) {
    for (Modality m : kAllModalities) stores[static_cast<std::size_t>(m)] = EmbeddingStore(extractor.descriptor(m));
    transcripts.clear();
  }

  std::map<std::filesystem::path, const MediaItem*> previous;
  if (reuse) {
    for (const MediaItem& item : old.items) previous[item.path] = &item;
  }
  MediaId next_id = reuse ? old.next_id() : 1;
  std::vector<MediaItem> kept;
  std::vector<MediaItem> fresh;
  for (MediaItem& item : scan.items) {
    auto it = previous.find(item.path);
    if (it != previous.end() && it->second->size_bytes == item.size_bytes &&
        it->second->mtime_ns == item.mtime_ns && it->second->kind == item.kind) {
      item.id = it->second->id;
      kept.push_back(std::move(item));
      previous.erase(it);
    } else {
      item.id = next_id++;
      fresh.push_back(std::move(item));
    }
  }
  std::vector<MediaId> removed;
  for (const MediaItem& item : old.items) {
    bool still = std::any_of(kept.begin(), kept.end(), [&](const MediaItem& k) { return k.id == item.id; });
    if (!still) removed.push_back(item.id);
  }
  report.unchanged_items = kept.size();
  report.removed_items = reuse ? removed.size() : 0;
  if (reuse && !removed.empty()) {
    for (auto& store : stores) store.remove_media(removed);
    std::erase_if(transcripts, [&](const TranscriptRecord& r) {
      return std::find(removed.begin(), removed.end(), r.media_id) != removed.end();
    });
  }

  say("extracting features for " + std::to_string(fresh.size()) + " new items");
  std::vector<ItemFeatures> features = extract_all(fresh, config, extractor, progress);
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    if (features[i].error) {
      ++report.failed_items;
      report.warnings.push_back({fresh[i].path, *features[i].error});
      continue;
    }
    for (std::size_t s = 0; s < kModalityCount; ++s) {
      for (auto& [rec, emb] : features[i].records[s]) stores[s].append(rec, emb);
    }
    transcripts.insert(transcripts.end(), features[i].transcripts.begin(), features[i].transcripts.end());
    kept.push_back(std::move(fresh[i]));
    ++report.new_items;
  }

  Catalog catalog;
  catalog.sampling = config.sampling;
  catalog.items = std::move(kept);
  fill_samples(catalog);

  // Nothing to re-embed: keep the published indices.
  const bool indices_current = reuse && report.new_items == 0 && report.removed_items == 0 &&
                               std::all_of(std::begin(kAllModalities), std::end(kAllModalities),
                                           [&](Modality m) { return std::filesystem::exists(layout.index(m)); });
  std::array<std::unique_ptr<VectorIndex>, kModalityCount> indices;
  if (indices_current) {
    for (Modality m : kAllModalities) {
      indices[static_cast<std::size_t>(m)] = load_index(layout.index(m), extractor.descriptor(m));
    }
  } else {
    say("building indices");
  }
  auto node = assemble(std::move(catalog), std::move(stores), std::move(transcripts), config,
                       std::move(indices));

  std::error_code ec;
  for (const char* sub : {"store", "indices", "fts", "logs"}) std::filesystem::create_directories(dir / sub, ec);
  for (Modality m : kAllModalities) {
    const ModalityIndex& mi = *node->modality(m);
    report.vectors[static_cast<std::size_t>(m)] = mi.store.size();
    if (!indices_current) {
      save_store(mi.store, layout.store(m));
      save_index(*mi.index, layout.index(m));
    }
  }
  save_transcripts(layout.transcripts(), node->transcripts);
  save_fts(node->metadata_fts, layout.metadata_fts());
  persist_catalog(node->catalog, layout.catalog());
  say("indexed " + std::to_string(report.new_items) + " new items");
  return report;
}

std::shared_ptr<NodeData> load_node_data(const std::filesystem::path& dir, const Extractor& extractor) {
  const ProjectConfig config = load_project_config(dir);
  const ProjectLayout layout{dir};
  if (!std::filesystem::exists(layout.catalog())) {
    throw Error(ErrorCode::kConfig, "project in " + dir.string() + " has not been indexed yet");
  }
  auto node = std::make_shared<NodeData>();
  node->catalog = load_catalog(layout.catalog());
  for (Modality m : kAllModalities) {
    EmbeddingStore store = load_store(layout.store(m));
    require_compatible(store.extractor(), extractor.descriptor(m));
    auto index = load_index(layout.index(m), extractor.descriptor(m));
    node->modalities[static_cast<std::size_t>(m)] = ModalityIndex{std::move(store), std::move(index)};
  }
  node->metadata_fts = load_fts(layout.metadata_fts());
  node->transcripts = load_transcripts(layout.transcripts());
  for (std::size_t i = 0; i < node->transcripts.size(); ++i) {
    node->transcript_fts.add(i, {{"text", node->transcripts[i].text}});
  }
  return node;
}

}  // namespace avsearch

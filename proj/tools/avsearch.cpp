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

// Command line front end: init, index, serve, aggregate, query and
// extract-serve.
//
// Exit codes: 0 success, 1 failure, 2 configuration error, 3 I/O error,
// 4 extractor unreachable, 5 federation error.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "avsearch/aggregator.hpp"
#include "avsearch/project.hpp"
#include "avsearch/service.hpp"
#include "avsearch/text.hpp"
#include "avsearch/wire.hpp"

namespace {

using namespace avsearch;

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kIoError = 3,
  kExtractorDown = 4,
  kFederationError = 5,
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kExtractorMismatch:
      return kConfigError;
    case ErrorCode::kIo:
    case ErrorCode::kFormat:
      return kIoError;
    case ErrorCode::kExtractorUnreachable:
      return kExtractorDown;
    case ErrorCode::kFederation:
      return kFederationError;
    default:
      return kFailure;
  }
}

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

int port_from_env(int fallback) {
  auto v = env("AVSEARCH_PORT");
  if (!v) return fallback;
  try {
    int p = std::stoi(*v);
    if (p < 0 || p > 65535) throw std::out_of_range("port");
    return p;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfig, "AVSEARCH_PORT must be a port number");
  }
}

ExtractorConfig effective_extractor(ExtractorConfig config) {
  if (auto endpoint = env("AVSEARCH_EXTRACTOR_ENDPOINT")) {
    config.type = "remote";
    config.endpoint = *endpoint;
  }
  return config;
}

std::unique_ptr<Extractor> open_extractor(const ExtractorConfig& config) {
  try {
    return make_extractor(effective_extractor(config));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kFederation) throw Error(ErrorCode::kExtractorUnreachable, e.what());
    throw;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

SearchService* g_service = nullptr;
ExtractService* g_extract_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
  if (g_extract_service) g_extract_service->stop();
}

// JSON lines by default: one result object per line, in rank order.
void print_results(const SearchResponse& response, bool table) {
  if (!table) {
    if (response.degraded) {
      std::cerr << "warning: degraded response, missing shards:";
      for (const auto& s : response.missing_shards) std::cerr << ' ' << s;
      std::cerr << '\n';
    }
    for (const ResultHit& r : response.results) std::cout << to_json(r).dump() << '\n';
    return;
  }
  if (response.degraded) {
    std::cout << "degraded: missing";
    for (const auto& s : response.missing_shards) std::cout << ' ' << s;
    std::cout << '\n';
  }
  std::size_t rank = 1;
  for (const ResultHit& r : response.results) {
    std::cout << rank++ << ". " << r.name << " (media " << r.media_id << ") score " << r.score;
    if (r.t_start) std::cout << " [" << *r.t_start << "s, " << r.t_end.value_or(*r.t_start) << "s]";
    if (r.bbox) {
      std::cout << " bbox(" << r.bbox->x0 << ',' << r.bbox->y0 << ',' << r.bbox->x1 << ',' << r.bbox->y1
                << ')';
    }
    if (r.snippet) std::cout << " \"" << *r.snippet << '"';
    if (!r.shard.empty() && r.shard != "local") std::cout << " @" << r.shard;
    std::cout << '\n';
  }
  if (response.results.empty()) std::cout << "no results\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"avsearch: search images, video and audio by text or example"};
  app.require_subcommand(1);

  // init
  std::string init_dir, media_root, extractor_type = "reference", endpoint, index_kind = "auto",
                                    shard_name = "local";
  double fps = 2.0, window = 4.0, overlap = 2.0;
  std::size_t workers = 1;
  auto* init = app.add_subcommand("init", "Create a project for a media folder");
  init->add_option("project", init_dir, "Project directory")->required();
  init->add_option("--media", media_root, "Media folder to index (can also be given to index)");
  init->add_option("--extractor", extractor_type, "reference or remote")
      ->check(CLI::IsMember({"reference", "remote"}));
  init->add_option("--endpoint", endpoint, "Extraction sidecar URL (remote extractor)");
  init->add_option("--fps", fps, "Frame sampling rate");
  init->add_option("--window", window, "Audio window length in seconds");
  init->add_option("--overlap", overlap, "Audio window overlap in seconds");
  init->add_option("--index-kind", index_kind, "auto, flat, ivf-flat or ivf-pq");
  init->add_option("--shard-name", shard_name, "Name reported in results");
  init->add_option("--workers", workers, "Extraction workers");

  // index
  std::string index_dir, index_media;
  std::optional<std::size_t> index_workers;
  bool quiet = false;
  auto* index = app.add_subcommand("index", "Ingest new media and rebuild indices");
  index->add_option("project", index_dir, "Project directory")->required();
  index->add_option("media-root", index_media, "Media folder; stored in the project config");
  index->add_option("--workers", index_workers, "Override extraction workers");
  index->add_flag("--quiet", quiet, "Only print the summary");

  // serve
  std::string serve_dir, host = "127.0.0.1", cors = "*";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "Serve a project over HTTP");
  serve->add_option("project", serve_dir, "Project directory")->required();
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--port", port, "Listen port (0 picks one)");
  serve->add_option("--cors-origin", cors, "Comma-separated allowed origins; * allows any, empty disables CORS");

  // aggregate
  std::vector<std::string> shard_specs;
  std::string agg_name = "aggregator";
  int timeout_ms = 2000;
  auto* aggregate = app.add_subcommand("aggregate", "Federate several search nodes");
  aggregate->add_option("--shards,--shard", shard_specs, "Comma-separated search nodes, each url or name=url")
      ->required()
      ->delimiter(',');
  aggregate->add_option("--host", host, "Listen address");
  aggregate->add_option("--port", port, "Listen port (0 picks one)");
  aggregate->add_option("--name", agg_name, "Aggregator name");
  aggregate->add_option("--timeout-ms", timeout_ms, "Per-shard timeout");
  aggregate->add_option("--cors-origin", cors, "Comma-separated allowed origins; * allows any, empty disables CORS");

  // query
  std::string query_target, text, modality = "scene", exemplar_path, exemplar_kind = "image",
                               compose_text;
  std::vector<std::string> filters;
  std::size_t topk = 10;
  std::optional<double> alpha;
  bool as_table = false;
  auto* query = app.add_subcommand("query", "Run one search against a project or a server URL");
  query->add_option("target", query_target, "Project directory or http:// URL")->required();
  query->add_option("text", text, "Query text; field:value terms become filters");
  query->add_option("-q,--query", text, "Query text (alternative to the positional form)");
  query->add_option("-m,--modality", modality, "scene, object, face, audio, speech or metadata");
  query->add_option("-k,--topk", topk, "Number of results");
  query->add_option("--filter", filters, "field:value metadata filter");
  query->add_option("--exemplar", exemplar_path, "Example file to search with");
  query->add_option("--exemplar-kind", exemplar_kind, "image, audio or text");
  query->add_option("--compose", compose_text, "Refining text for an exemplar query");
  query->add_option("--alpha", alpha, "Text weight of a composed query")->check(CLI::Range(0.0, 1.0));
  query->add_flag("--table", as_table, "Print a human-readable table instead of JSON lines");

  // extract-serve
  std::uint32_t ref_dim = 256;
  auto* xserve = app.add_subcommand("extract-serve", "Serve the reference extractor over the extraction protocol");
  xserve->add_option("--host", host, "Listen address");
  xserve->add_option("--port", port, "Listen port (0 picks one)");
  xserve->add_option("--dim", ref_dim, "Embedding dimension");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*init) {
      ProjectConfig config;
      if (!media_root.empty()) config.media_root = std::filesystem::absolute(media_root);
      config.sampling = {fps, window, overlap};
      config.extractor.type = extractor_type;
      config.extractor.endpoint = endpoint;
      config.index.kind = index_kind;
      config.engine.shard_name = shard_name;
      config.workers = workers;
      init_project(init_dir, config);
      std::cout << "initialized project in " << init_dir << '\n';
      return kOk;
    }

    if (*index) {
      ProjectConfig config = load_project_config(index_dir);
      if (!index_media.empty()) {
        if (!std::filesystem::is_directory(index_media)) {
          throw Error(ErrorCode::kIo, "media root " + index_media + " is not a directory");
        }
        config.media_root = std::filesystem::absolute(index_media);
      }
      if (index_workers) config.workers = *index_workers;
      save_project_config(index_dir, config);
      auto extractor = open_extractor(config.extractor);
      ProgressFn progress;
      if (!quiet) progress = [](const std::string& msg) { std::cerr << msg << '\n'; };
      IndexReport report = index_project(index_dir, *extractor, progress);
      for (const ScanWarning& w : report.warnings) std::cerr << "warning: " << w.path.string() << ": " << w.reason << '\n';
      std::cout << report.new_items << " new items, " << report.removed_items << " removed, "
                << report.unchanged_items << " unchanged, " << report.failed_items << " failed\n";
      return kOk;
    }

    if (*serve) {
      ProjectConfig config = load_project_config(serve_dir);
      auto extractor = std::shared_ptr<const Extractor>(open_extractor(config.extractor));
      auto data = load_node_data(serve_dir, *extractor);
      auto engine = std::make_shared<Engine>(data, extractor, config.engine);
      SearchService service(engine, {host, port_from_env(port), cors});
      int bound = service.bind();
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "serving " << data->catalog.items.size() << " items on http://" << host << ':' << bound
                << std::endl;
      service.run();
      g_service = nullptr;
      return kOk;
    }

    if (*aggregate) {
      auto aggregator = std::make_shared<Aggregator>(AggregatorConfig{agg_name, 1});
      for (const std::string& spec : shard_specs) {
        auto eq = spec.find('=');
        std::string name = eq == std::string::npos ? spec : spec.substr(0, eq);
        std::string url = eq == std::string::npos ? spec : spec.substr(eq + 1);
        if (name.empty() || url.empty()) throw Error(ErrorCode::kConfig, "bad shard '" + spec + "'");
        if (url.find("://") == std::string::npos) url = "http://" + url;
        try {
          aggregator->register_shard(name, std::make_shared<HttpShardClient>(
                                               url, std::chrono::milliseconds(timeout_ms)));
        } catch (const Error& e) {
          if (e.code() == ErrorCode::kExtractorMismatch) throw Error(ErrorCode::kFederation, e.what());
          throw;
        }
      }
      SearchService service(aggregator, {host, port_from_env(port), cors});
      int bound = service.bind();
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "aggregating " << aggregator->shard_count() << " shards on http://" << host << ':' << bound
                << std::endl;
      service.run();
      g_service = nullptr;
      return kOk;
    }

    if (*query) {
      std::vector<std::pair<std::string, std::string>> params;
      if (!text.empty()) params.emplace_back("q", text);
      params.emplace_back("modality", modality);
      params.emplace_back("topk", std::to_string(topk));
      for (const auto& f : filters) params.emplace_back("filter", f);
      Query q = query_from_params(params);
      if (alpha) q.alpha = *alpha;
      if (!compose_text.empty()) q.compose_text = compose_text;
      if (!exemplar_path.empty()) {
        auto kind = parse_payload_kind(exemplar_kind);
        if (!kind) throw Error(ErrorCode::kConfig, "unknown exemplar kind '" + exemplar_kind + "'");
        q.exemplar = Exemplar{*kind, read_file(exemplar_path)};
      }

      SearchResponse response;
      if (query_target.rfind("http://", 0) == 0 || query_target.rfind("https://", 0) == 0) {
        HttpShardClient client(query_target, std::chrono::milliseconds(30000));
        response = client.search(q);
      } else {
        ProjectConfig config = load_project_config(query_target);
        auto extractor = std::shared_ptr<const Extractor>(open_extractor(config.extractor));
        Engine engine(load_node_data(query_target, *extractor), extractor, config.engine);
        response = engine.search(q);
      }
      print_results(response, as_table);
      return kOk;
    }

    if (*xserve) {
      auto extractor = std::make_shared<ReferenceExtractor>(ReferenceExtractorOptions{ref_dim});
      ExtractService service(extractor, {host, port_from_env(port), ""});
      int bound = service.bind();
      g_extract_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "extraction protocol on http://" << host << ':' << bound << std::endl;
      service.run();
      g_extract_service = nullptr;
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

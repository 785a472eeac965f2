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

#include "avsearch/service.hpp"

#include <chrono>
#include <fstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "avsearch/extract_protocol.hpp"
#include "avsearch/wire.hpp"

namespace avsearch {

namespace {

std::string content_type_for(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".png") return "image/png";
  if (ext == ".webp") return "image/webp";
  if (ext == ".mp4") return "video/mp4";
  if (ext == ".mov") return "video/quicktime";
  if (ext == ".mkv") return "video/x-matroska";
  if (ext == ".webm") return "video/webm";
  if (ext == ".mp3") return "audio/mpeg";
  if (ext == ".wav") return "audio/wav";
  if (ext == ".flac") return "audio/flac";
  if (ext == ".ogg") return "audio/ogg";
  if (ext == ".wisedesc") return "application/json";
  return "application/octet-stream";
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& detail) {
  res.status = status;
  res.set_content(nlohmann::json{{"error", code}, {"detail", detail}}.dump(), "application/json");
}

nlohmann::json media_json(const MediaItem& item) {
  return {{"media_id", item.id},
          {"name", item.path.filename().string()},
          {"kind", to_string(item.kind)},
          {"duration_sec", item.duration_sec},
          {"has_audio", item.has_audio},
          {"metadata", item.metadata}};
}

int bind_server(httplib::Server& server, const ServiceConfig& config) {
  // SO_REUSEADDR only: SO_REUSEPORT would let two servers share a port.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  int port = config.port == 0 ? server.bind_to_any_port(config.host)
                              : (server.bind_to_port(config.host, config.port) ? config.port : -1);
  if (port < 0) {
    throw Error(ErrorCode::kIo, "cannot listen on " + config.host + ":" + std::to_string(config.port));
  }
  return port;
}

}  // namespace

std::string cors_allowed_origin(std::string_view allowlist, std::string_view origin) {
  std::size_t start = 0;
  while (start <= allowlist.size()) {
    std::size_t end = allowlist.find(',', start);
    if (end == std::string_view::npos) end = allowlist.size();
    std::string_view entry = allowlist.substr(start, end - start);
    while (!entry.empty() && entry.front() == ' ') entry.remove_prefix(1);
    while (!entry.empty() && entry.back() == ' ') entry.remove_suffix(1);
    if (entry == "*") return "*";
    if (!entry.empty() && entry == origin) return std::string(origin);
    start = end + 1;
  }
  return {};
}

struct SearchService::Impl {
  httplib::Server server;
};

SearchService::SearchService(std::shared_ptr<const SearchBackend> initial, ServiceConfig config)
    : impl_(std::make_unique<Impl>()), config_(std::move(config)), backend_(std::move(initial)) {
  if (!backend_) throw Error(ErrorCode::kInvalidArgument, "service needs a backend");
  httplib::Server& svr = impl_->server;

  svr.set_post_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
    std::string allowed = cors_allowed_origin(config_.cors_origin, req.get_header_value("Origin"));
    if (allowed.empty()) return;
    res.set_header("Access-Control-Allow-Origin", allowed);
    if (allowed != "*") res.set_header("Vary", "Origin");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type, Range");
  });
  svr.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  auto run_search = [this](const Query& query, httplib::Response& res) {
    auto started = std::chrono::steady_clock::now();
    auto be = backend();
    SearchResponse response = be->search(query);
    nlohmann::json body = to_json(response);
    body["latency_ms"] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    res.set_content(body.dump(), "application/json");
  };

  auto guarded = [](auto&& fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        int status = e.code() == ErrorCode::kNotFound ? 404 : 400;
        if (e.code() == ErrorCode::kFederation || e.code() == ErrorCode::kIo) status = 503;
        send_error(res, status, to_string(e.code()), e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      }
    };
  };

  svr.Get("/search", guarded([run_search](const httplib::Request& req, httplib::Response& res) {
            std::vector<std::pair<std::string, std::string>> params(req.params.begin(), req.params.end());
            run_search(query_from_params(params), res);
          }));
  svr.Post("/search", guarded([run_search](const httplib::Request& req, httplib::Response& res) {
             nlohmann::json body;
             try {
               body = nlohmann::json::parse(req.body);
             } catch (const nlohmann::json::exception&) {
               throw Error(ErrorCode::kInvalidArgument, "request body is not JSON");
             }
             run_search(query_from_json(body), res);
           }));
  svr.Get("/info", guarded([this](const httplib::Request&, httplib::Response& res) {
            res.set_content(backend()->info().dump(), "application/json");
          }));

  auto find_media = [this](const httplib::Request& req) {
    MediaId id = 0;
    try {
      id = std::stoull(req.matches[1].str());
    } catch (const std::exception&) {
      throw Error(ErrorCode::kNotFound, "no such media");
    }
    auto be = backend();
    const MediaItem* item = be->media(id);
    if (item == nullptr) throw Error(ErrorCode::kNotFound, "no media with id " + std::to_string(id));
    return std::make_pair(be, *item);
  };
  svr.Get(R"(/media/(\d+)/info)", guarded([find_media](const httplib::Request& req, httplib::Response& res) {
            auto [be, item] = find_media(req);
            res.set_content(media_json(item).dump(), "application/json");
          }));
  svr.Get(R"(/media/(\d+))", guarded([find_media](const httplib::Request& req, httplib::Response& res) {
            auto [be, item] = find_media(req);
            std::error_code ec;
            auto size = std::filesystem::file_size(item.path, ec);
            if (ec) throw Error(ErrorCode::kNotFound, "media file is gone: " + item.path.string());
            std::filesystem::path media_path = item.path;
            res.set_header("Accept-Ranges", "bytes");
            res.set_content_provider(
                static_cast<std::size_t>(size), content_type_for(media_path),
                [media_path](std::size_t offset, std::size_t length, httplib::DataSink& sink) {
                  std::ifstream in(media_path, std::ios::binary);
                  if (!in) return false;
                  in.seekg(static_cast<std::streamoff>(offset));
                  std::vector<char> buf(std::min<std::size_t>(length, 1 << 16));
                  while (length > 0 && in) {
                    std::size_t n = std::min(length, buf.size());
                    in.read(buf.data(), static_cast<std::streamsize>(n));
                    auto got = static_cast<std::size_t>(in.gcount());
                    if (got == 0 || !sink.write(buf.data(), got)) return false;
                    length -= got;
                  }
                  return true;
                });
          }));
}

SearchService::~SearchService() { stop(); }

void SearchService::publish(std::shared_ptr<const SearchBackend> backend) {
  if (!backend) throw Error(ErrorCode::kInvalidArgument, "cannot publish a null backend");
  std::lock_guard lock(mu_);
  backend_ = std::move(backend);
}

std::shared_ptr<const SearchBackend> SearchService::backend() const {
  std::lock_guard lock(mu_);
  return backend_;
}

int SearchService::bind() {
  if (port_ < 0) port_ = bind_server(impl_->server, config_);
  return port_;
}

void SearchService::run() {
  bind();
  impl_->server.listen_after_bind();
}

void SearchService::start() {
  bind();
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void SearchService::stop() {
  if (impl_) impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

struct ExtractService::Impl {
  httplib::Server server;
};

ExtractService::ExtractService(std::shared_ptr<const Extractor> extractor, ServiceConfig config)
    : impl_(std::make_unique<Impl>()), config_(std::move(config)), extractor_(std::move(extractor)) {
  if (!extractor_) throw Error(ErrorCode::kInvalidArgument, "extract service needs an extractor");
  httplib::Server& svr = impl_->server;
  svr.Get("/info", [this](const httplib::Request&, httplib::Response& res) {
    nlohmann::json list = nlohmann::json::array();
    for (Modality m : kAllModalities) list.push_back(to_json(extractor_->descriptor(m)));
    res.set_content(nlohmann::json{{"extractors", std::move(list)}}.dump(), "application/json");
  });
  svr.Post("/extract", [this](const httplib::Request& req, httplib::Response& res) {
    ++served_;
    try {
      auto [requested, items] = decode_extract_request(nlohmann::json::parse(req.body));
      auto results = serve_extract_items(*extractor_, requested, items);
      res.set_content(encode_extract_results(results).dump(), "application/json");
    } catch (const nlohmann::json::exception& e) {
      send_error(res, 400, "invalid_argument", e.what());
    } catch (const Error& e) {
      send_error(res, e.code() == ErrorCode::kExtractorMismatch ? 409 : 400, to_string(e.code()), e.what());
    }
  });
}

ExtractService::~ExtractService() { stop(); }

int ExtractService::bind() {
  if (port_ < 0) port_ = bind_server(impl_->server, config_);
  return port_;
}

void ExtractService::run() {
  bind();
  impl_->server.listen_after_bind();
}

void ExtractService::start() {
  bind();
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void ExtractService::stop() {
  if (impl_) impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace avsearch

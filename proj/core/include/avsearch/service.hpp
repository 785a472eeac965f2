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

#include <atomic>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>

#include "avsearch/extract.hpp"
#include "avsearch/query_engine.hpp"

namespace avsearch {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  /// Comma-separated origin allowlist; "*" allows any origin and empty
  /// disables CORS headers.
  std::string cors_origin = "*";
};

/// Access-Control-Allow-Origin value for a request from `origin`, or empty
/// when the allowlist does not admit it.
std::string cors_allowed_origin(std::string_view allowlist, std::string_view origin);

// HTTP front end for a SearchBackend.
//
//   GET  /search?q=...&modality=...&topk=...&alpha=...&filter=field:value
//   POST /search            JSON request body (see wire.hpp)
//   GET  /media/{id}        media bytes, honours Range
//   GET  /media/{id}/info   catalog entry as JSON
//   GET  /info              backend description
//
// Errors are JSON {"error": <code>, "detail": <message>}; bad requests get
// 400, unknown media 404.
class SearchService {
 public:
  SearchService(std::shared_ptr<const SearchBackend> backend, ServiceConfig config = {});
  ~SearchService();

  SearchService(const SearchService&) = delete;
  SearchService& operator=(const SearchService&) = delete;

  /// Atomically replaces the backend; in-flight requests finish on the old
  /// one.
  void publish(std::shared_ptr<const SearchBackend> backend);
  std::shared_ptr<const SearchBackend> backend() const;

  /// Binds the listening socket and returns the bound port. Throws
  /// Error(kIo) when the address is unavailable.
  int bind();
  /// Serves until stop(); binds first if needed.
  void run();
  /// Serves on a background thread.
  void start();
  void stop();
  int port() const noexcept { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  ServiceConfig config_;
  mutable std::mutex mu_;
  std::shared_ptr<const SearchBackend> backend_;
  int port_ = -1;
  std::thread thread_;
};

// Serves a local Extractor over the extraction wire protocol (POST /extract,
// GET /info). Stands in for a sidecar in tests and demos.
class ExtractService {
 public:
  ExtractService(std::shared_ptr<const Extractor> extractor, ServiceConfig config = {});
  ~ExtractService();

  ExtractService(const ExtractService&) = delete;
  ExtractService& operator=(const ExtractService&) = delete;

  int bind();
  void run();
  void start();
  void stop();
  int port() const noexcept { return port_; }
  std::size_t requests_served() const noexcept { return served_.load(); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  ServiceConfig config_;
  std::shared_ptr<const Extractor> extractor_;
  std::atomic<std::size_t> served_{0};
  int port_ = -1;
  std::thread thread_;
};

}  // namespace avsearch

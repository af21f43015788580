#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

#include "semshort/config.hpp"

namespace semshort {

struct ServiceOptions {
  PipelineConfig defaults;
  std::size_t cache_capacity = 32;
  std::size_t max_items = 2000;
  /// The file provider reads server-side paths, so requests may not select it.
  bool allow_file_provider = false;
};

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON
};

/// Backend for the interactive tool:
///   POST /preprocess, POST /run, GET /runs/{id}, POST /embedquery, GET /health.
/// Runs are cached in an LRU keyed by a hash of the canonical request; the
/// hash doubles as the run id. Thread-safe.
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Routes one request without any socket involved.
  HttpResponse handle(std::string_view method, std::string_view path, std::string_view body);

  /// Binds and serves on a background thread; port 0 picks a free port.
  /// Returns the bound port.
  int start(const std::string& host, int port = 0);
  /// Binds and blocks until stop().
  void serve(const std::string& host, int port);
  void stop();

  [[nodiscard]] std::size_t cache_size() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// "host:port", ":port" or "port".
std::pair<std::string, int> parse_bind_address(std::string_view address);

}  // namespace semshort

#include <httplib.h>

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <thread>

#include <fmt/format.h>

#include "semshort/embed.hpp"

namespace semshort {

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::invalid_config, "endpoint_url must include a scheme: " + url, "config.endpoint_url");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

[[noreturn]] void provider_error(const std::string& message) {
  throw Error(ErrorCode::provider, message, "embed");
}

bool transient_status(int status) { return status == 408 || status == 429 || status >= 500; }

std::vector<std::vector<double>> parse_batch_response(const std::string& body, std::size_t expected) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    provider_error(std::string("malformed provider response: ") + e.what());
  }
  if (!j.contains("data") || !j["data"].is_array()) provider_error("provider response lacks a data array");
  const auto& data = j["data"];
  if (data.size() != expected) {
    provider_error(fmt::format("count mismatch: provider returned {} vectors for {} texts", data.size(), expected));
  }
  std::vector<std::vector<double>> rows(expected);
  std::vector<bool> filled(expected, false);
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto& entry = data[k];
    std::size_t slot = k;
    if (entry.contains("index") && entry["index"].is_number_integer()) {
      const auto idx = entry["index"].get<long>();
      if (idx < 0 || static_cast<std::size_t>(idx) >= expected) provider_error("provider index out of range");
      slot = static_cast<std::size_t>(idx);
    }
    if (filled[slot]) provider_error("provider returned a duplicate index");
    if (!entry.contains("embedding") || !entry["embedding"].is_array()) provider_error("entry without embedding");
    for (const auto& v : entry["embedding"]) {
      if (!v.is_number()) provider_error("non-numeric embedding value");
      rows[slot].push_back(v.get<double>());
    }
    filled[slot] = true;
  }
  return rows;
}

}  // namespace

EmbeddingMatrix fetch_remote_embeddings(const std::vector<std::string>& texts, const EndpointConfig& config) {
  if (config.endpoint_url.empty()) {
    throw Error(ErrorCode::invalid_config, "endpoint_url is required", "config.endpoint_url");
  }
  if (config.batch_size == 0 || config.batch_size > config.max_batch_size) {
    throw Error(ErrorCode::invalid_config,
                fmt::format("batch_size must be in [1, {}]", config.max_batch_size), "config.batch_size");
  }
  std::string api_key = config.api_key;
  if (api_key.empty()) {
    if (const char* env = std::getenv(kApiKeyEnv)) api_key = env;
  }
  if (api_key.empty()) provider_error(fmt::format("missing credential: set {}", kApiKeyEnv));

  const auto url = split_url(config.endpoint_url);
  httplib::Client client(url.origin);
  const auto timeout = std::chrono::duration<double>(config.timeout_s);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  const httplib::Headers headers{{"Authorization", "Bearer " + api_key}};

  std::vector<std::vector<double>> rows;
  rows.reserve(texts.size());
  std::size_t dims = 0;
  for (std::size_t start = 0; start < texts.size(); start += config.batch_size) {
    const std::size_t end = std::min(texts.size(), start + config.batch_size);
    nlohmann::json request{{"model", config.model_name},
                           {"input", std::vector<std::string>(texts.begin() + static_cast<long>(start),
                                                              texts.begin() + static_cast<long>(end))}};
    const std::string payload = request.dump();

    std::string last_error;
    std::optional<std::vector<std::vector<double>>> batch;
    for (int attempt = 0; attempt <= config.max_retries && !batch; ++attempt) {
      if (attempt > 0) std::this_thread::sleep_for(config.backoff_base * (1 << (attempt - 1)));
      auto res = client.Post(url.path, headers, payload, "application/json");
      if (!res) {
        last_error = "connection failed: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 401 || res->status == 403) {
        provider_error(fmt::format("auth failure: HTTP {}", res->status));
      }
      if (transient_status(res->status)) {
        last_error = fmt::format("HTTP {}", res->status);
        continue;
      }
      if (res->status < 200 || res->status >= 300) {
        provider_error(fmt::format("provider rejected request: HTTP {}", res->status));
      }
      batch = parse_batch_response(res->body, end - start);
    }
    if (!batch) {
      provider_error(fmt::format("timeout after {} retries ({})", config.max_retries, last_error));
    }
    for (auto& row : *batch) {
      if (dims == 0) dims = row.size();
      if (row.size() != dims) {
        provider_error(fmt::format("dimension drift: got {} values, expected {}", row.size(), dims));
      }
      rows.push_back(std::move(row));
    }
  }

  EmbeddingMatrix e;
  e.vectors = Matrix::from_rows(rows);
  e.provider_id = config.model_name.empty() ? "remote" : config.model_name;
  if (config.normalize) {
    try {
      normalize_rows(e.vectors);
    } catch (const Error& err) {
      provider_error(err.what());
    }
    e.normalized = true;
  }
  return e;
}

}  // namespace semshort

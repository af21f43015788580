#include "semshort/service.hpp"

#include <charconv>
#include <list>
#include <mutex>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "semshort/pipeline.hpp"
#include "semshort/report.hpp"

namespace semshort {

namespace {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

HttpResponse reply(int status, const json& body) { return {status, body.dump()}; }

HttpResponse bad_request(const std::string& message, const std::string& field) {
  return reply(400, {{"error", message}, {"field", field}});
}

HttpResponse from_error(const Error& e) {
  switch (e.code()) {
    case ErrorCode::invalid_config:
    case ErrorCode::invalid_input:
    case ErrorCode::io:
      return reply(400, {{"error", e.what()}, {"field", e.where()}});
    case ErrorCode::provider:
      return reply(502, {{"error", e.what()}, {"stage", e.where().empty() ? "embed" : e.where()}});
    case ErrorCode::numerical:
      break;
  }
  return reply(500, {{"error", e.what()}, {"stage", e.where()}});
}

json require_object(std::string_view body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::invalid_input, "request body is not valid JSON", "body");
  if (!j.is_object()) throw Error(ErrorCode::invalid_input, "request body must be a JSON object", "body");
  return j;
}

template <typename T>
T optional_field(const json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::invalid_input, fmt::format("{}: wrong type", key), key);
  }
}

/// `items` is raw text, a list of statements, or a list of {id, factor, text}.
ItemCorpus corpus_from_request(const json& j) {
  const auto it = j.find("items");
  if (it == j.end()) throw Error(ErrorCode::invalid_input, "items: required", "items");
  ParseOptions opts;
  if (const auto p = j.find("prefix"); p != j.end() && !p->is_null()) {
    if (!p->is_string()) throw Error(ErrorCode::invalid_input, "prefix: expected a string", "prefix");
    opts.prefix = p->get<std::string>();
  }
  opts.has_factor_column = optional_field<bool>(j, "has_factor_column", false);
  opts.language = optional_field<std::string>(j, "language", "auto");

  std::string raw;
  if (it->is_string()) {
    raw = it->get<std::string>();
  } else if (it->is_array()) {
    ItemCorpus staged;
    bool structured = false;
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& entry = (*it)[i];
      const std::string field = fmt::format("items[{}]", i);
      Item item;
      item.id = static_cast<int>(i + 1);
      if (entry.is_string()) {
        item.text = entry.get<std::string>();
      } else if (entry.is_object() && entry.contains("text") && entry["text"].is_string()) {
        structured = true;
        item.text = entry["text"].get<std::string>();
        if (entry.contains("id")) {
          if (!entry["id"].is_number_integer()) throw Error(ErrorCode::invalid_input, field + ".id: expected an integer", field + ".id");
          item.id = entry["id"].get<int>();
        }
        if (entry.contains("factor") && !entry["factor"].is_null()) {
          if (!entry["factor"].is_string()) throw Error(ErrorCode::invalid_input, field + ".factor: expected a string", field + ".factor");
          item.factor_label = entry["factor"].get<std::string>();
        }
      } else {
        throw Error(ErrorCode::invalid_input, field + ": expected a string or {id, factor, text}", field);
      }
      staged.items.push_back(std::move(item));
    }
    if (staged.items.empty()) throw Error(ErrorCode::invalid_input, "items: empty list", "items");
    if (structured) {
      raw = serialize_items(staged);
      opts.has_factor_column = true;
    } else {
      for (const auto& item : staged.items) raw += item.text + "\n";
    }
  } else {
    throw Error(ErrorCode::invalid_input, "items: expected text or a list", "items");
  }
  try {
    return parse_items(raw, opts);
  } catch (const Error& e) {
    throw Error(e.code(), e.what(), e.where().empty() ? "items" : e.where());
  }
}

json corpus_json(const ItemCorpus& corpus) {
  json items = json::array();
  for (const auto& item : corpus.items) {
    items.push_back({{"id", item.id},
                     {"text", item.text},
                     {"factor", item.factor_label ? json(*item.factor_label) : json(nullptr)},
                     {"tokens", item.tokens}});
  }
  return items;
}

}  // namespace

struct Service::Impl {
  ServiceOptions options;
  mutable std::mutex mutex;
  std::list<std::pair<std::string, json>> lru;  // most recent first
  std::unordered_map<std::string, std::list<std::pair<std::string, json>>::iterator> index;
  httplib::Server server;
  std::thread thread;

  std::optional<json> lookup(const std::string& id) {
    std::lock_guard lock(mutex);
    const auto it = index.find(id);
    if (it == index.end()) return std::nullopt;
    lru.splice(lru.begin(), lru, it->second);
    return it->second->second;
  }

  void store(const std::string& id, json result) {
    std::lock_guard lock(mutex);
    if (const auto it = index.find(id); it != index.end()) {
      lru.splice(lru.begin(), lru, it->second);
      return;
    }
    lru.emplace_front(id, std::move(result));
    index[id] = lru.begin();
    while (lru.size() > options.cache_capacity) {
      index.erase(lru.back().first);
      lru.pop_back();
    }
  }

  PipelineConfig request_config(const json& j) const {
    json merged = to_json(options.defaults);
    if (const auto it = j.find("config"); it != j.end() && !it->is_null()) {
      if (!it->is_object()) throw Error(ErrorCode::invalid_config, "config: expected an object", "config");
      merged.merge_patch(*it);
    }
    auto config = config_from_json(merged);
    validate(config);
    if (config.embedding.provider == "file" && !options.allow_file_provider) {
      throw Error(ErrorCode::invalid_config, "config.embedding.provider: the file provider is disabled",
                  "config.embedding.provider");
    }
    if (!config.stopwords_path.empty()) {
      throw Error(ErrorCode::invalid_config, "config.stopwords_path: server-side files cannot be selected",
                  "config.stopwords_path");
    }
    return config;
  }

  HttpResponse preprocess(std::string_view body) {
    const json j = require_object(body);
    auto corpus = corpus_from_request(j);
    if (corpus.size() > options.max_items) {
      return reply(413, {{"error", fmt::format("corpus has {} items; the limit is {}", corpus.size(), options.max_items)}});
    }
    Warnings warnings;
    corpus = tokenize(std::move(corpus), &warnings);
    json polarity = json::array();
    for (const auto& p : validate_polarity(corpus)) {
      polarity.push_back({{"item_id", p.item_id}, {"marker", p.marker}, {"message", p.message}});
    }
    return reply(200, {{"language", corpus.language},
                       {"count", corpus.size()},
                       {"has_factor_labels", corpus.has_factor_labels()},
                       {"items", corpus_json(corpus)},
                       {"polarity", polarity},
                       {"warnings", warnings}});
  }

  HttpResponse run(std::string_view body) {
    const json j = require_object(body);
    const auto corpus = corpus_from_request(j);
    if (corpus.size() > options.max_items) {
      return reply(413, {{"error", fmt::format("corpus has {} items; the limit is {}", corpus.size(), options.max_items)}});
    }
    auto config = request_config(j);

    std::optional<EmbeddingMatrix> inline_embeddings;
    if (const auto it = j.find("embeddings"); it != j.end() && !it->is_null()) {
      std::vector<std::vector<double>> rows;
      try {
        rows = it->get<std::vector<std::vector<double>>>();
      } catch (const json::exception&) {
        throw Error(ErrorCode::invalid_input, "embeddings: expected a list of numeric rows", "embeddings");
      }
      try {
        inline_embeddings = EmbeddingMatrix{Matrix::from_rows(rows), "inline", false};
      } catch (const Error& e) {
        throw Error(ErrorCode::invalid_input, std::string("embeddings: ") + e.what(), "embeddings");
      }
      config.embedding.provider = "inline";
    } else if (config.embedding.provider == "inline") {
      throw Error(ErrorCode::invalid_input, "embeddings: required by the inline provider", "embeddings");
    }

    std::optional<ResponseTable> responses;
    std::string responses_raw;
    if (const auto it = j.find("responses"); it != j.end() && !it->is_null()) {
      if (!it->is_string()) throw Error(ErrorCode::invalid_input, "responses: expected CSV text", "responses");
      responses_raw = it->get<std::string>();
      try {
        responses = parse_responses(responses_raw);
      } catch (const Error& e) {
        throw Error(e.code(), std::string("responses: ") + e.what(), "responses");
      }
    }

    const json canonical{{"items", serialize_items(corpus)},
                         {"language", corpus.language},
                         {"prefix", corpus.prefix ? json(*corpus.prefix) : json(nullptr)},
                         {"config", to_json(config)},
                         {"embeddings", inline_embeddings ? matrix_to_json(inline_embeddings->vectors) : json(nullptr)},
                         {"responses", responses_raw}};
    const std::string id = fmt::format("{:016x}", fnv1a64(canonical.dump()));
    if (auto hit = lookup(id)) return reply(200, {{"id", id}, {"cached", true}, {"result", std::move(*hit)}});

    const auto result = run_pipeline(corpus, config, responses ? &*responses : nullptr,
                                     inline_embeddings ? &*inline_embeddings : nullptr);
    json payload = result_to_json(result, false);
    store(id, payload);
    return reply(200, {{"id", id}, {"cached", false}, {"result", std::move(payload)}});
  }

  HttpResponse embedquery(std::string_view body) {
    const json j = require_object(body);
    const auto texts_it = j.find("texts");
    if (texts_it == j.end() || !texts_it->is_array() || texts_it->empty()) {
      throw Error(ErrorCode::invalid_input, "texts: expected a nonempty list of strings", "texts");
    }
    std::vector<std::string> texts;
    for (const auto& t : *texts_it) {
      if (!t.is_string()) throw Error(ErrorCode::invalid_input, "texts: expected strings", "texts");
      texts.push_back(t.get<std::string>());
    }
    if (texts.size() > options.max_items) {
      return reply(413, {{"error", fmt::format("{} texts exceed the limit of {}", texts.size(), options.max_items)}});
    }
    const auto config = request_config(j);
    const auto& e = config.embedding;
    EmbeddingMatrix m;
    if (e.provider == "hash") {
      m = hash_encode(texts, e.hash);
    } else if (e.provider == "remote") {
      m = fetch_remote_embeddings(texts, endpoint_config(e));
    } else {
      throw Error(ErrorCode::invalid_config, "config.embedding.provider: only hash and remote can be queried",
                  "config.embedding.provider");
    }
    const bool include_vectors = optional_field<bool>(j, "include_vectors", true);
    json out{{"status", "ok"},
             {"provider_id", m.provider_id},
             {"n", m.vectors.rows()},
             {"dims", m.vectors.cols()},
             {"normalized", m.normalized}};
    if (include_vectors) out["vectors"] = matrix_to_json(m.vectors);
    return reply(200, out);
  }

  HttpResponse dispatch(std::string_view method, std::string_view path, std::string_view body) {
    try {
      if (path == "/health") {
        if (method != "GET") return reply(405, {{"error", "use GET"}});
        return reply(200, {{"status", "ok"}, {"version", version()}});
      }
      if (path == "/preprocess" || path == "/run" || path == "/embedquery") {
        if (method != "POST") return reply(405, {{"error", "use POST"}});
        if (path == "/preprocess") return preprocess(body);
        if (path == "/run") return run(body);
        return embedquery(body);
      }
      if (path.starts_with("/runs/")) {
        if (method != "GET") return reply(405, {{"error", "use GET"}});
        const std::string id(path.substr(6));
        if (auto hit = lookup(id)) return reply(200, {{"id", id}, {"cached", true}, {"result", std::move(*hit)}});
        return reply(404, {{"error", "unknown run id " + id}});
      }
      return reply(404, {{"error", "no such endpoint"}});
    } catch (const Error& e) {
      return from_error(e);
    } catch (const json::exception& e) {
      return bad_request(e.what(), "body");
    } catch (const std::exception& e) {
      return reply(500, {{"error", e.what()}});
    }
  }

  void mount() {
    const auto forward = [this](const httplib::Request& req, httplib::Response& res) {
      const auto out = dispatch(req.method, req.path, req.body);
      res.status = out.status;
      res.set_content(out.body, "application/json");
    };
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server.set_payload_max_length(64u << 20);
    server.Get("/health", forward);
    server.Get(R"(/runs/([0-9a-f]+))", forward);
    server.Post("/preprocess", forward);
    server.Post("/run", forward);
    server.Post("/embedquery", forward);
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>()) {
  validate(options.defaults);
  if (options.cache_capacity < 1) throw Error(ErrorCode::invalid_config, "cache capacity must be at least 1");
  impl_->options = std::move(options);
  impl_->mount();
}

Service::~Service() { stop(); }

HttpResponse Service::handle(std::string_view method, std::string_view path, std::string_view body) {
  return impl_->dispatch(method, path, body);
}

int Service::start(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::io, fmt::format("cannot bind {}:{}", host, port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void Service::serve(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) throw Error(ErrorCode::io, fmt::format("cannot bind {}:{}", host, port));
}

void Service::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::size_t Service::cache_size() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->lru.size();
}

std::pair<std::string, int> parse_bind_address(std::string_view address) {
  std::string host = "127.0.0.1";
  std::string_view port_part = address;
  if (const auto colon = address.rfind(':'); colon != std::string_view::npos) {
    if (colon > 0) host = std::string(address.substr(0, colon));
    port_part = address.substr(colon + 1);
  }
  int port = 0;
  const auto [ptr, ec] = std::from_chars(port_part.data(), port_part.data() + port_part.size(), port);
  if (ec != std::errc{} || ptr != port_part.data() + port_part.size() || port < 0 || port > 65535) {
    throw Error(ErrorCode::invalid_config, fmt::format("invalid bind address '{}'", address), "bind");
  }
  return {host, port};
}

}  // namespace semshort

#include "semshort/config.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>

#include "semshort/error.hpp"

namespace semshort {

namespace {

using nlohmann::json;

[[noreturn]] void reject(const std::string& field, const std::string& message) {
  throw Error(ErrorCode::invalid_config, field + ": " + message, field);
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) reject(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) reject(path + "." + key, "unknown field");
  }
}

template <typename T>
void read(const json& j, const std::string& path, const char* key, T& out) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  const std::string field = path + "." + key;
  if constexpr (std::is_same_v<T, bool>) {
    if (!it->is_boolean()) reject(field, "expected a boolean");
    out = it->get<bool>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!it->is_string()) reject(field, "expected a string");
    out = it->get<std::string>();
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!it->is_number()) reject(field, "expected a number");
    out = it->get<T>();
  } else if constexpr (std::is_unsigned_v<T>) {
    if (!it->is_number_integer()) reject(field, "expected an integer");
    if (it->is_number_unsigned() || it->get<long long>() >= 0) {
      out = it->get<T>();
    } else {
      reject(field, "must be at least 1");
    }
  } else {
    if (!it->is_number_integer()) reject(field, "expected an integer");
    out = it->get<T>();
  }
}

void read_optional_count(const json& j, const std::string& path, const char* key, std::optional<std::size_t>& out,
                         const char* auto_word) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return;
  const std::string field = path + "." + key;
  if (it->is_string() && auto_word && it->get<std::string>() == auto_word) {
    out.reset();
    return;
  }
  if (!it->is_number_integer()) {
    reject(field, auto_word ? fmt::format("expected an integer or \"{}\"", auto_word) : "expected an integer");
  }
  if (it->get<long long>() < 1) reject(field, "must be at least 1");
  out = it->get<std::size_t>();
}

}  // namespace

const char* version() { return SEMSHORT_VERSION; }

std::size_t default_k_per_topic(std::size_t n_items) {
  if (n_items <= 20) return 2;
  if (n_items >= 30) return 4;
  return 3;
}

std::size_t resolved_k_per_topic(const PipelineConfig& config, std::size_t n_items) {
  return config.k_per_topic.value_or(default_k_per_topic(n_items));
}

void validate(const PipelineConfig& c) {
  static const std::set<std::string> providers{"hash", "file", "remote", "inline"};
  const auto& e = c.embedding;
  if (!providers.contains(e.provider)) reject("config.embedding.provider", "must be hash, file, remote or inline");
  if (e.provider == "file" && e.path.empty()) reject("config.embedding.path", "required for the file provider");
  if (e.provider == "remote") {
    if (e.endpoint_url.empty()) reject("config.embedding.endpoint_url", "required for the remote provider");
    if (e.model_name.empty()) reject("config.embedding.model_name", "required for the remote provider");
  }
  if (e.batch_size < 1 || e.batch_size > 256) reject("config.embedding.batch_size", "must be in [1, 256]");
  if (!(e.timeout_s > 0.0)) reject("config.embedding.timeout_s", "must be positive");
  if (e.hash.dims < 16) reject("config.embedding.hash.dims", "must be at least 16");
  if (e.hash.ngram_min < 1 || e.hash.ngram_max < e.hash.ngram_min) {
    reject("config.embedding.hash.ngram_range", "needs 1 <= min <= max");
  }
  if (c.n_neighbors < 2) reject("config.n_neighbors", "must be at least 2");
  if (c.n_components < 2) reject("config.n_components", "must be at least 2");
  if (!(c.min_dist >= 0.0) || !std::isfinite(c.min_dist) || c.min_dist >= 10.0) {
    reject("config.min_dist", "must be in [0, 10)");
  }
  if (c.min_cluster_size < 2) reject("config.min_cluster_size", "must be at least 2");
  if (c.min_samples < 1) reject("config.min_samples", "must be at least 1");
  if (c.nr_topics && *c.nr_topics < 1) reject("config.nr_topics", "must be at least 1 or \"auto\"");
  if (!(c.merge_threshold >= 0.0 && c.merge_threshold <= 1.0)) reject("config.merge_threshold", "must be in [0, 1]");
  if (c.top_n_words < 1) reject("config.top_n_words", "must be at least 1");
  if (c.k_per_topic && *c.k_per_topic < 1) reject("config.k_per_topic", "must be at least 1");
  if (!(c.min_prob >= 0.0 && c.min_prob <= 1.0)) reject("config.min_prob", "must be in [0, 1]");
  if (c.budget && *c.budget < 1) reject("config.budget", "must be at least 1");
  if (c.epochs < 1) reject("config.epochs", "must be at least 1");
  if (!(c.ellipse_c > 0.0) || !std::isfinite(c.ellipse_c)) reject("config.ellipse_c", "must be positive");
}

nlohmann::json to_json(const PipelineConfig& c) {
  const auto& e = c.embedding;
  json embedding{{"provider", e.provider},
                 {"normalize", e.normalize},
                 {"hash", {{"dims", e.hash.dims}, {"ngram_range", {e.hash.ngram_min, e.hash.ngram_max}},
                           {"seed", e.hash.seed}}}};
  if (e.provider == "file") embedding["path"] = e.path;
  if (e.provider == "remote") {
    embedding["endpoint_url"] = e.endpoint_url;
    embedding["model_name"] = e.model_name;
    embedding["batch_size"] = e.batch_size;
    embedding["timeout_s"] = e.timeout_s;
  }
  return {{"embedding", embedding},
          {"n_neighbors", c.n_neighbors},
          {"n_components", c.n_components},
          {"min_dist", c.min_dist},
          {"min_cluster_size", c.min_cluster_size},
          {"min_samples", c.min_samples},
          {"nr_topics", c.nr_topics ? json(*c.nr_topics) : json("auto")},
          {"merge_threshold", c.merge_threshold},
          {"top_n_words", c.top_n_words},
          {"k_per_topic", c.k_per_topic ? json(*c.k_per_topic) : json("auto")},
          {"min_prob", c.min_prob},
          {"budget", c.budget ? json(*c.budget) : json(nullptr)},
          {"seed", c.seed},
          {"epochs", c.epochs},
          {"tsne_on_umap", c.tsne_on_umap},
          {"ellipse_c", c.ellipse_c},
          {"stopwords_path", c.stopwords_path}};
}

PipelineConfig config_from_json(const nlohmann::json& j, const std::string& path) {
  PipelineConfig c;
  if (j.is_null()) return c;
  check_keys(j, path,
             {"embedding", "n_neighbors", "n_components", "min_dist", "min_cluster_size", "min_samples", "nr_topics",
              "merge_threshold", "top_n_words", "k_per_topic", "min_prob", "budget", "seed", "epochs",
              "tsne_on_umap", "ellipse_c", "stopwords_path"});
  if (const auto it = j.find("embedding"); it != j.end()) {
    const std::string ep = path + ".embedding";
    check_keys(*it, ep, {"provider", "path", "endpoint_url", "model_name", "batch_size", "timeout_s", "hash",
                         "normalize"});
    auto& e = c.embedding;
    read(*it, ep, "provider", e.provider);
    read(*it, ep, "path", e.path);
    read(*it, ep, "endpoint_url", e.endpoint_url);
    read(*it, ep, "model_name", e.model_name);
    read(*it, ep, "batch_size", e.batch_size);
    read(*it, ep, "timeout_s", e.timeout_s);
    read(*it, ep, "normalize", e.normalize);
    if (const auto h = it->find("hash"); h != it->end()) {
      const std::string hp = ep + ".hash";
      check_keys(*h, hp, {"dims", "ngram_range", "seed"});
      read(*h, hp, "dims", e.hash.dims);
      read(*h, hp, "seed", e.hash.seed);
      if (const auto r = h->find("ngram_range"); r != h->end()) {
        if (!r->is_array() || r->size() != 2 || !(*r)[0].is_number_unsigned() || !(*r)[1].is_number_unsigned()) {
          reject(hp + ".ngram_range", "expected [min, max]");
        }
        e.hash.ngram_min = (*r)[0].get<std::size_t>();
        e.hash.ngram_max = (*r)[1].get<std::size_t>();
      }
    }
  }
  read(j, path, "n_neighbors", c.n_neighbors);
  read(j, path, "n_components", c.n_components);
  read(j, path, "min_dist", c.min_dist);
  read(j, path, "min_cluster_size", c.min_cluster_size);
  read(j, path, "min_samples", c.min_samples);
  read_optional_count(j, path, "nr_topics", c.nr_topics, "auto");
  read(j, path, "merge_threshold", c.merge_threshold);
  read(j, path, "top_n_words", c.top_n_words);
  read_optional_count(j, path, "k_per_topic", c.k_per_topic, "auto");
  read(j, path, "min_prob", c.min_prob);
  read_optional_count(j, path, "budget", c.budget, nullptr);
  read(j, path, "seed", c.seed);
  read(j, path, "epochs", c.epochs);
  read(j, path, "tsne_on_umap", c.tsne_on_umap);
  read(j, path, "ellipse_c", c.ellipse_c);
  read(j, path, "stopwords_path", c.stopwords_path);
  return c;
}

EndpointConfig endpoint_config(const EmbeddingSettings& settings) {
  EndpointConfig e;
  e.endpoint_url = settings.endpoint_url;
  e.model_name = settings.model_name;
  e.batch_size = settings.batch_size;
  e.timeout_s = settings.timeout_s;
  e.normalize = settings.normalize;
  return e;
}

}  // namespace semshort

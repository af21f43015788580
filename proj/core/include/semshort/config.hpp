#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "semshort/embed.hpp"

namespace semshort {

/// Library version string.
const char* version();

inline constexpr const char* kNrTopicsGuidance = "set to known factor count or +1";

struct EmbeddingSettings {
  /// "hash" (offline hashed n-grams), "file" (CSV/JSONL at `path`),
  /// "remote" (HTTP endpoint) or "inline" (matrix passed alongside the corpus).
  std::string provider = "hash";
  std::string path;
  std::string endpoint_url;
  std::string model_name;
  std::size_t batch_size = 32;
  double timeout_s = 30.0;
  HashEncoderOptions hash;
  bool normalize = true;
};

struct PipelineConfig {
  EmbeddingSettings embedding;
  std::size_t n_neighbors = 3;
  std::size_t n_components = 5;
  double min_dist = 0.0;
  std::size_t min_cluster_size = 2;
  std::size_t min_samples = 1;
  std::optional<std::size_t> nr_topics;  // nullopt: "auto"
  double merge_threshold = 0.9;
  std::size_t top_n_words = 3;
  std::optional<std::size_t> k_per_topic;  // nullopt: derived from the item count
  double min_prob = 0.85;
  std::optional<std::size_t> budget;
  std::uint64_t seed = 42;
  int epochs = 500;
  bool tsne_on_umap = false;
  double ellipse_c = 2.0;
  std::string stopwords_path;  // empty: the shipped list for the corpus language
};

/// 2 for scales of at most 20 items, 4 from 30 items, 3 in between.
std::size_t default_k_per_topic(std::size_t n_items);

std::size_t resolved_k_per_topic(const PipelineConfig& config, std::size_t n_items);

/// Throws ErrorCode::invalid_config with the offending field path as `where`.
void validate(const PipelineConfig& config);

nlohmann::json to_json(const PipelineConfig& config);

/// Missing keys keep their defaults; unknown keys and wrong types are
/// rejected with a field path ("config.embedding.provider").
PipelineConfig config_from_json(const nlohmann::json& j, const std::string& path = "config");

EndpointConfig endpoint_config(const EmbeddingSettings& settings);

}  // namespace semshort

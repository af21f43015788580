#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semshort/cluster.hpp"
#include "semshort/config.hpp"
#include "semshort/corpus.hpp"
#include "semshort/embed.hpp"
#include "semshort/metrics.hpp"
#include "semshort/reduce.hpp"
#include "semshort/topics.hpp"
#include "semshort/viz.hpp"

namespace semshort {

inline constexpr const char* kStatusOk = "ok";
inline constexpr const char* kStatusUnassigned = "unassigned";

struct StageTiming {
  std::string stage;
  double milliseconds = 0.0;
};

struct RunResult {
  PipelineConfig config;
  std::string status = kStatusOk;
  ItemCorpus corpus;  // tokenised
  std::string provider_id;
  Layout cluster_layout;
  Layout layout2d;
  ClusterAssignment assignment;
  TopicModel model;
  Scene scene;
  std::optional<EvaluationReport> evaluation;
  std::vector<PolarityWarning> polarity;
  Warnings warnings;
  std::vector<StageTiming> timings;  // not part of the reproducible payload
};

/// Runs embed, reduce, cluster, topics, selection, the 2D layout and the
/// metrics in order. `embeddings` overrides the configured provider (and is
/// required when it is "inline"). Failures are Errors whose `where` names
/// the stage ("embed", "reduce", "cluster", "topics", "viz", "metrics")
/// unless they already carry a field path. An all-noise clustering is not an
/// error: the result has no topics and status "unassigned".
RunResult run_pipeline(const ItemCorpus& corpus, const PipelineConfig& config,
                       const ResponseTable* responses = nullptr, const EmbeddingMatrix* embeddings = nullptr);

/// Embedding step alone, as run_pipeline performs it.
EmbeddingMatrix compute_embeddings(const ItemCorpus& corpus, const PipelineConfig& config);

struct PerturbationSetting {
  std::string parameter;
  std::string value;
  PipelineConfig config;
};

/// n_neighbors {2, 10}, min_cluster_size {4, 6}, min_samples {2, 3}, each
/// varied alone from `base`.
std::vector<PerturbationSetting> default_grid(const PipelineConfig& base);

/// `{"n_neighbors": [2, 10], "min_dist": [0.1], ...}`; keys are config fields.
std::vector<PerturbationSetting> grid_from_json(const nlohmann::json& j, const PipelineConfig& base);

struct StabilityRow {
  std::string parameter;  // "default" for the reference run
  std::string value;
  std::string status = kStatusOk;  // "ok", "unassigned" or "error"
  std::vector<int> selected;
  std::optional<double> jaccard;
  std::size_t kept = 0;
  std::size_t changed = 0;
  std::string error;
};

struct StabilityTable {
  std::vector<StabilityRow> rows;  // the default run first
};

/// Embeds once, then reruns the pipeline per setting and compares each
/// selection with the default one. Throws when the default run is unassigned.
StabilityTable perturbation_suite(const ItemCorpus& corpus, const PipelineConfig& base,
                                  const std::vector<PerturbationSetting>& grid,
                                  const EmbeddingMatrix* embeddings = nullptr);

}  // namespace semshort

#include "semshort/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <tuple>

#include <fmt/format.h>

namespace semshort {

namespace {

template <typename F>
auto run_stage(const char* name, std::vector<StageTiming>& timings, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  try {
    auto out = body();
    const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;
    timings.push_back({name, elapsed.count()});
    return out;
  } catch (const Error& e) {
    if (!e.where().empty()) throw;
    throw Error(e.code(), fmt::format("{}: {}", name, e.what()), name);
  }
}

}  // namespace

EmbeddingMatrix compute_embeddings(const ItemCorpus& corpus, const PipelineConfig& config) {
  const auto& e = config.embedding;
  if (e.provider == "hash") {
    auto m = hash_encode(corpus, e.hash);
    return m;
  }
  if (e.provider == "file") return load_embeddings(e.path, corpus.size(), e.normalize);
  if (e.provider == "remote") return fetch_remote_embeddings(corpus.embedding_texts(), endpoint_config(e));
  throw Error(ErrorCode::invalid_input, "the inline provider needs embeddings supplied with the corpus", "embed");
}

RunResult run_pipeline(const ItemCorpus& corpus, const PipelineConfig& config, const ResponseTable* responses,
                       const EmbeddingMatrix* embeddings) {
  validate(config);
  if (corpus.size() < kMinCorpusSize) {
    throw Error(ErrorCode::invalid_input,
                fmt::format("corpus: at least {} items are required, got {}", kMinCorpusSize, corpus.size()), "corpus");
  }
  RunResult result;
  result.config = config;
  auto& warnings = result.warnings;
  const std::size_t n = corpus.size();

  result.corpus = run_stage("corpus", result.timings, [&] {
    if (config.stopwords_path.empty()) return tokenize(corpus, &warnings);
    return tokenize(corpus, load_stopwords(config.stopwords_path), &warnings);
  });
  result.polarity = validate_polarity(result.corpus);
  for (const auto& p : result.polarity) warnings.push_back(p.message);

  const EmbeddingMatrix embedded = run_stage("embed", result.timings, [&] {
    EmbeddingMatrix m = embeddings ? *embeddings : compute_embeddings(result.corpus, config);
    if (embeddings && config.embedding.normalize && !m.normalized) {
      normalize_rows(m.vectors);
      m.normalized = true;
    }
    validate_embeddings(m, n);
    return m;
  });
  result.provider_id = embedded.provider_id;

  result.cluster_layout = run_stage("reduce", result.timings, [&] {
    std::size_t k = config.n_neighbors - 1;
    if (k > n - 1) {
      warnings.push_back(fmt::format("reduce: n_neighbors={} exceeds the corpus; using {}", config.n_neighbors, n));
      k = n - 1;
    }
    const auto graph = build_knn(embedded.vectors, k);
    const auto affinity = fuzzy_simplicial_set(graph);
    UmapOptions opts;
    opts.n_components = config.n_components;
    opts.min_dist = config.min_dist;
    opts.epochs = config.epochs;
    opts.seed = config.seed;
    return optimize_layout(affinity, opts, &warnings);
  });

  result.assignment = run_stage("cluster", result.timings, [&] {
    HdbscanOptions opts;
    opts.min_cluster_size = config.min_cluster_size;
    opts.min_samples = config.min_samples;
    return hdbscan(result.cluster_layout.coords, opts);
  });

  if (result.assignment.all_noise()) {
    result.status = kStatusUnassigned;
    warnings.push_back("cluster: every item was labelled noise; no topics were formed");
    for (const auto& item : result.corpus.items) result.model.outliers.push_back(item.id);
    result.model.top_n_words = config.top_n_words;
  } else {
    result.model = run_stage("topics", result.timings, [&] {
      auto model = build_topics(result.corpus, result.assignment, config.top_n_words, &warnings);
      const MergeMode mode =
          config.nr_topics ? MergeMode::to_count(*config.nr_topics) : MergeMode::automatic(config.merge_threshold);
      model = merge_topics(std::move(model), result.corpus, mode, &warnings);
      SelectionOptions sel;
      sel.k_per_topic = resolved_k_per_topic(config, n);
      sel.min_prob = config.min_prob;
      sel.budget = config.budget;
      return select_representatives(std::move(model), result.assignment, sel, &warnings);
    });
    if (4 * result.model.outliers.size() > n) {
      warnings.push_back(fmt::format("topics: {} of {} items are outliers (more than 25%)",
                                     result.model.outliers.size(), n));
    }
  }

  std::tie(result.layout2d, result.scene) = run_stage("viz", result.timings, [&] {
    TsneOptions opts;
    opts.seed = config.seed;
    auto layout = tsne_2d(config.tsne_on_umap ? result.cluster_layout.coords : embedded.vectors, opts, &warnings);
    auto scene = build_scene(layout.coords, result.corpus, result.model, result.assignment, config.ellipse_c, &warnings);
    return std::pair{std::move(layout), std::move(scene)};
  });

  if (result.corpus.has_factor_labels() || responses) {
    result.evaluation = run_stage("metrics", result.timings, [&] {
      return evaluate(result.corpus, result.assignment, result.model, responses);
    });
  }
  return result;
}

std::vector<PerturbationSetting> default_grid(const PipelineConfig& base) {
  std::vector<PerturbationSetting> grid;
  for (std::size_t v : {2, 10}) {
    auto c = base;
    c.n_neighbors = v;
    grid.push_back({"n_neighbors", std::to_string(v), c});
  }
  for (std::size_t v : {4, 6}) {
    auto c = base;
    c.min_cluster_size = v;
    grid.push_back({"min_cluster_size", std::to_string(v), c});
  }
  for (std::size_t v : {2, 3}) {
    auto c = base;
    c.min_samples = v;
    grid.push_back({"min_samples", std::to_string(v), c});
  }
  return grid;
}

std::vector<PerturbationSetting> grid_from_json(const nlohmann::json& j, const PipelineConfig& base) {
  if (!j.is_object()) throw Error(ErrorCode::invalid_config, "grid: expected an object of value lists", "grid");
  std::vector<PerturbationSetting> grid;
  for (const auto& [key, values] : j.items()) {
    if (!values.is_array() || values.empty()) {
      throw Error(ErrorCode::invalid_config, "grid." + key + ": expected a nonempty list", "grid." + key);
    }
    for (const auto& v : values) {
      auto patched = to_json(base);
      patched[key] = v;
      auto config = config_from_json(patched);
      validate(config);
      grid.push_back({key, v.is_string() ? v.get<std::string>() : v.dump(), std::move(config)});
    }
  }
  return grid;
}

StabilityTable perturbation_suite(const ItemCorpus& corpus, const PipelineConfig& base,
                                  const std::vector<PerturbationSetting>& grid, const EmbeddingMatrix* embeddings) {
  const EmbeddingMatrix shared = embeddings ? *embeddings : compute_embeddings(corpus, base);
  const auto reference = run_pipeline(corpus, base, nullptr, &shared);
  if (reference.status != kStatusOk) {
    throw Error(ErrorCode::invalid_input, "stability: the default configuration leaves every item unassigned");
  }
  const auto base_ids = reference.model.selected_ids();
  const std::set<int> base_set(base_ids.begin(), base_ids.end());

  StabilityTable table;
  table.rows.push_back({"default", "", kStatusOk, base_ids, 1.0, base_ids.size(), 0, {}});
  for (const auto& setting : grid) {
    StabilityRow row{setting.parameter, setting.value, kStatusOk, {}, std::nullopt, 0, base_ids.size(), {}};
    try {
      const auto run = run_pipeline(corpus, setting.config, nullptr, &shared);
      row.status = run.status;
      row.selected = run.model.selected_ids();
    } catch (const Error& e) {
      row.status = "error";
      row.error = e.what();
    }
    if (row.status == kStatusOk && !row.selected.empty()) {
      const std::set<int> other(row.selected.begin(), row.selected.end());
      const auto overlap = selection_overlap(base_set, other);
      row.jaccard = overlap.jaccard;
      row.kept = overlap.kept;
      row.changed = overlap.changed;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace semshort

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "semshort/pipeline.hpp"
#include "semshort/report.hpp"
#include "semshort/service.hpp"

namespace fs = std::filesystem;
using namespace semshort;

namespace {

struct Inputs {
  std::string items;
  bool factors = false;
  std::string prefix;
  std::string language = "auto";
  std::string embeddings;
  std::string endpoint;
  std::string model;
  bool hash_encoder = false;
  std::string responses;
  std::string config_file;
  std::string nr_topics = "auto";
  std::string k_per_topic = "auto";
  std::size_t budget = 0;
  bool no_normalize = false;
  std::string out = ".";
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << content;
}

std::optional<std::size_t> count_or_auto(const std::string& value, const char* flag) {
  if (value == "auto") return std::nullopt;
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != value.size() || v < 1) {
    throw Error(ErrorCode::invalid_config, fmt::format("{} expects a positive integer or \"auto\"", flag), flag);
  }
  return static_cast<std::size_t>(v);
}

void add_run_options(CLI::App& cmd, Inputs& in, PipelineConfig& c) {
  cmd.add_option("--items", in.items, "Item file: one statement per line, or CSV/TSV with id,factor,text")
      ->required()
      ->check(CLI::ExistingFile);
  cmd.add_flag("--factors", in.factors, "Item file carries an id,factor,text table");
  cmd.add_option("--prefix", in.prefix, "Question prefix prepended to every item before embedding");
  cmd.add_option("--language", in.language, "Corpus language: auto, en or zh");
  cmd.add_option("--stopwords", c.stopwords_path, "Stop-word file replacing the shipped list")
      ->check(CLI::ExistingFile);
  cmd.add_option("--config", in.config_file, "JSON config; explicit flags take precedence")->check(CLI::ExistingFile);

  auto* provider = cmd.add_option_group("provider", "Embedding source (default: hash encoder)");
  provider->add_option("--embeddings", in.embeddings, "Precomputed embeddings (CSV or JSONL)")
      ->check(CLI::ExistingFile);
  provider->add_option("--endpoint", in.endpoint, "Embedding endpoint URL (key from SEMSHORT_API_KEY)");
  provider->add_flag("--hash-encoder", in.hash_encoder, "Offline hashed character n-gram encoder");
  provider->require_option(0, 1);
  cmd.add_option("--model", in.model, "Model name sent to the endpoint");
  cmd.add_option("--batch-size", c.embedding.batch_size, "Texts per embedding request");
  cmd.add_flag("--no-normalize", in.no_normalize, "Keep embedding rows unnormalised");

  cmd.add_option("--responses", in.responses, "Response CSV (header of item ids) for fidelity and reliability")
      ->check(CLI::ExistingFile);
  cmd.add_option("--n-neighbors", c.n_neighbors, "UMAP neighbourhood size")->capture_default_str();
  cmd.add_option("--n-components", c.n_components, "UMAP output dimensions")->capture_default_str();
  cmd.add_option("--min-dist", c.min_dist, "UMAP minimum distance")->capture_default_str();
  cmd.add_option("--epochs", c.epochs, "UMAP optimisation epochs")->capture_default_str();
  cmd.add_option("--min-cluster-size", c.min_cluster_size, "HDBSCAN minimum cluster size")->capture_default_str();
  cmd.add_option("--min-samples", c.min_samples, "HDBSCAN min_samples")->capture_default_str();
  cmd.add_option("--nr-topics", in.nr_topics, std::string("Topic count or auto; ") + kNrTopicsGuidance)
      ->capture_default_str();
  cmd.add_option("--merge-threshold", c.merge_threshold, "Cosine threshold for automatic merging")
      ->capture_default_str();
  cmd.add_option("--top-n-words", c.top_n_words, "Keywords per topic")->capture_default_str();
  cmd.add_option("--k-per-topic", in.k_per_topic, "Representatives per topic, or auto (2 up to 20 items, 4 from 30)")
      ->capture_default_str();
  cmd.add_option("--min-prob", c.min_prob, "Probability below which representatives are flagged")
      ->capture_default_str();
  cmd.add_option("--budget", in.budget, "Total items, allocated in proportion to topic size");
  cmd.add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd.add_flag("--tsne-on-umap", c.tsne_on_umap, "Project the UMAP layout instead of the raw embeddings");
  cmd.add_option("--ellipse-c", c.ellipse_c, "Ellipse contour level")->capture_default_str();
}

PipelineConfig finalize(const CLI::App& cmd, const Inputs& in, PipelineConfig c) {
  if (!in.config_file.empty()) {
    auto file = config_from_json(nlohmann::json::parse(read_file(in.config_file)));
    // Flags given explicitly win over the file.
    const auto given = [&](const char* name) { return cmd.count(name) > 0; };
    if (given("--n-neighbors")) file.n_neighbors = c.n_neighbors;
    if (given("--n-components")) file.n_components = c.n_components;
    if (given("--min-dist")) file.min_dist = c.min_dist;
    if (given("--epochs")) file.epochs = c.epochs;
    if (given("--min-cluster-size")) file.min_cluster_size = c.min_cluster_size;
    if (given("--min-samples")) file.min_samples = c.min_samples;
    if (given("--merge-threshold")) file.merge_threshold = c.merge_threshold;
    if (given("--top-n-words")) file.top_n_words = c.top_n_words;
    if (given("--min-prob")) file.min_prob = c.min_prob;
    if (given("--seed")) file.seed = c.seed;
    if (given("--tsne-on-umap")) file.tsne_on_umap = c.tsne_on_umap;
    if (given("--ellipse-c")) file.ellipse_c = c.ellipse_c;
    if (given("--stopwords")) file.stopwords_path = c.stopwords_path;
    if (given("--batch-size")) file.embedding.batch_size = c.embedding.batch_size;
    if (!given("--nr-topics")) c.nr_topics = file.nr_topics;
    if (!given("--k-per-topic")) c.k_per_topic = file.k_per_topic;
    if (!given("--budget")) c.budget = file.budget;
    const auto nr = c.nr_topics, k = c.k_per_topic, budget = c.budget;
    c = file;
    c.nr_topics = nr;
    c.k_per_topic = k;
    c.budget = budget;
  }
  if (cmd.count("--nr-topics")) c.nr_topics = count_or_auto(in.nr_topics, "--nr-topics");
  if (cmd.count("--k-per-topic")) c.k_per_topic = count_or_auto(in.k_per_topic, "--k-per-topic");
  if (cmd.count("--budget")) c.budget = in.budget;
  if (!in.embeddings.empty()) {
    c.embedding.provider = "file";
    c.embedding.path = in.embeddings;
  } else if (!in.endpoint.empty()) {
    c.embedding.provider = "remote";
    c.embedding.endpoint_url = in.endpoint;
    c.embedding.model_name = in.model;
  } else if (in.hash_encoder || in.config_file.empty()) {
    c.embedding.provider = "hash";
  }
  if (in.no_normalize) c.embedding.normalize = false;
  validate(c);
  return c;
}

ItemCorpus load_corpus(const Inputs& in) {
  ParseOptions opts;
  if (!in.prefix.empty()) opts.prefix = in.prefix;
  opts.has_factor_column = in.factors;
  opts.language = in.language;
  return parse_items(read_file(in.items), opts);
}

int report_error(const Error& e) {
  std::cerr << "error: " << e.what();
  if (!e.where().empty()) std::cerr << " [" << e.where() << "]";
  std::cerr << "\n";
  switch (e.code()) {
    case ErrorCode::invalid_config: return 2;
    case ErrorCode::provider: return 3;
    default: return 1;
  }
}

Service* g_service = nullptr;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic scale simplification: topics and short forms from questionnaire item texts"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  Inputs in;
  PipelineConfig config;

  auto* simplify = app.add_subcommand("simplify", "Run the full pipeline and write result.json, scene.svg, report.md");
  add_run_options(*simplify, in, config);
  simplify->add_option("--out", in.out, "Output directory")->capture_default_str();

  Inputs st_in;
  PipelineConfig st_config;
  std::string grid = "default";
  auto* stability = app.add_subcommand("stability", "Rerun under parameter perturbations and compare selections");
  add_run_options(*stability, st_in, st_config);
  stability->add_option("--grid", grid, "\"default\" or a JSON file of {parameter: [values]}")->capture_default_str();
  stability->add_option("--out", st_in.out, "Output directory")->capture_default_str();

  std::string bind = "127.0.0.1:8080";
  std::string serve_config;
  auto* serve = app.add_subcommand("serve", "HTTP service for the interactive tool");
  serve->add_option("--bind", bind, "host:port")->capture_default_str();
  serve->add_option("--config", serve_config, "JSON config used as request defaults")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simplify) {
      const auto c = finalize(*simplify, in, config);
      const auto corpus = load_corpus(in);
      std::optional<ResponseTable> responses;
      if (!in.responses.empty()) responses = load_responses(in.responses);
      const auto result = run_pipeline(corpus, c, responses ? &*responses : nullptr);
      fs::create_directories(in.out);
      write_file(fs::path(in.out) / "result.json", result_to_json(result).dump(2) + "\n");
      write_file(fs::path(in.out) / "scene.svg", render_svg(result.scene));
      write_file(fs::path(in.out) / "report.md", render_report_md(result));
      std::cout << fmt::format("status: {}\ntopics: {}\nselected: {}\n", result.status, result.model.topics.size(),
                               result.model.selected_ids().size());
      for (const auto& t : result.model.topics) {
        std::string ids;
        for (const auto& r : t.representatives) ids += fmt::format(" Q{}", r.item_id);
        std::string words;
        for (const auto& k : t.keywords) words += (words.empty() ? "" : ", ") + k.term;
        std::cout << fmt::format("  topic {} [{}]:{}\n", t.topic_id, words, ids);
      }
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
      return 0;
    }
    if (*stability) {
      const auto c = finalize(*stability, st_in, st_config);
      const auto corpus = load_corpus(st_in);
      const auto settings =
          grid == "default" ? default_grid(c) : grid_from_json(nlohmann::json::parse(read_file(grid)), c);
      const auto table = perturbation_suite(corpus, c, settings);
      fs::create_directories(st_in.out);
      write_file(fs::path(st_in.out) / "stability.json", stability_to_json(table).dump(2) + "\n");
      const auto md = render_stability_md(table);
      write_file(fs::path(st_in.out) / "stability.md", md);
      std::cout << md;
      return 0;
    }
    if (*serve) {
      ServiceOptions opts;
      if (!serve_config.empty()) opts.defaults = config_from_json(nlohmann::json::parse(read_file(serve_config)));
      const auto [host, port] = parse_bind_address(bind);
      Service service(opts);
      g_service = &service;
      std::signal(SIGINT, [](int) {
        if (g_service) g_service->stop();
      });
      std::signal(SIGTERM, [](int) {
        if (g_service) g_service->stop();
      });
      std::cerr << fmt::format("listening on {}:{}\n", host, port);
      service.serve(host, port);
      g_service = nullptr;
      return 0;
    }
  } catch (const Error& e) {
    return report_error(e);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

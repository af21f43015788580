#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "semshort/cluster.hpp"
#include "semshort/embed.hpp"
#include "semshort/pipeline.hpp"
#include "semshort/random.hpp"
#include "semshort/reduce.hpp"

using namespace semshort;

namespace {

Matrix random_points(std::size_t n, std::size_t dims, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, dims);
  for (auto& v : m.values()) v = rng.normal();
  return m;
}

ItemCorpus random_corpus(std::size_t n) {
  static const char* words[] = {"sleep", "worry", "friends", "work",  "appetite", "calm",  "tired",
                                "happy", "money", "tasks",   "night", "meals",    "party", "focus"};
  Rng rng(5);
  ItemCorpus corpus;
  for (std::size_t i = 0; i < n; ++i) {
    std::string text = "I";
    for (int w = 0; w < 6; ++w) text += std::string(" ") + words[rng.below(14)];
    corpus.items.push_back({static_cast<int>(i) + 1, text, std::nullopt, {}, false});
  }
  return corpus;
}

void BM_Knn(benchmark::State& state) {
  const auto pts = random_points(static_cast<std::size_t>(state.range(0)), 384, 1);
  for (auto _ : state) benchmark::DoNotOptimize(build_knn(pts, 2));
}
BENCHMARK(BM_Knn)->Arg(20)->Arg(50)->Arg(200);

void BM_Umap(benchmark::State& state) {
  const auto pts = random_points(static_cast<std::size_t>(state.range(0)), 384, 2);
  const auto affinity = fuzzy_simplicial_set(build_knn(pts, 2));
  UmapOptions opts;
  for (auto _ : state) benchmark::DoNotOptimize(optimize_layout(affinity, opts));
}
BENCHMARK(BM_Umap)->Arg(20)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Hdbscan(benchmark::State& state) {
  const auto pts = random_points(static_cast<std::size_t>(state.range(0)), 5, 3);
  for (auto _ : state) benchmark::DoNotOptimize(hdbscan(pts, {2, 1}));
}
BENCHMARK(BM_Hdbscan)->Arg(20)->Arg(50)->Arg(200);

void BM_Tsne(benchmark::State& state) {
  const auto pts = random_points(static_cast<std::size_t>(state.range(0)), 384, 4);
  for (auto _ : state) benchmark::DoNotOptimize(tsne_2d(pts));
}
BENCHMARK(BM_Tsne)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_Pipeline(benchmark::State& state) {
  const auto corpus = random_corpus(static_cast<std::size_t>(state.range(0)));
  PipelineConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(run_pipeline(corpus, config));
}
BENCHMARK(BM_Pipeline)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

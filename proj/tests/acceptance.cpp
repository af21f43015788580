// One PASS/FAIL line per acceptance criterion; exit status 1 when any fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "semshort/cluster.hpp"
#include "semshort/metrics.hpp"
#include "semshort/pipeline.hpp"
#include "semshort/reduce.hpp"
#include "semshort/report.hpp"
#include "semshort/service.hpp"
#include "semshort/topics.hpp"
#include "semshort/viz.hpp"
#include "stability_tables.hpp"
#include "support.hpp"

using namespace semshort;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Outcome ari_oracle() {
  Outcome o;
  const auto t0 = Clock::now();
  Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(11);
    const auto ka = 1 + rng.below(4), kb = 1 + rng.below(4);
    std::vector<int> a(n), b(n);
    for (auto& v : a) v = static_cast<int>(rng.below(ka));
    for (auto& v : b) v = static_cast<int>(rng.below(kb));
    worst = std::max(worst, std::abs(adjusted_rand_index(a, b).value - testing::ari_pair_counting(a, b)));
    o.require(adjusted_rand_index(a, a).value == 1.0, fmt::format("identical partition trial {} != 1", trial));
  }
  const double elapsed = seconds_since(t0);
  o.require(worst <= 1e-12, fmt::format("max deviation {:.3e}", worst));
  o.require(elapsed < 1.0, fmt::format("took {:.3f} s", elapsed));
  if (o.pass) o.detail = fmt::format("200 instances, max deviation {:.1e}, {:.3f} s", worst, elapsed);
  return o;
}

Outcome jaccard_rows() {
  Outcome o;
  std::size_t rows = 0;
  for (const auto& scale : testing::reference_stability()) {
    for (const auto& row : scale.rows) {
      const auto got = selection_overlap(scale.default_set, row.selected);
      const double rounded = std::round(got.jaccard * 1000.0) / 1000.0;
      o.require(std::abs(rounded - row.jaccard) < 1e-9 && got.kept == static_cast<std::size_t>(row.kept) &&
                    got.changed == static_cast<std::size_t>(row.changed),
                fmt::format("{} {}: jaccard {:.3f} kept {} changed {}", row.scale, row.setting, got.jaccard, got.kept,
                            got.changed));
      ++rows;
    }
  }
  const auto& dass = testing::reference_stability().front();
  const auto first = selection_overlap(dass.default_set, dass.rows.front().selected);
  if (o.pass) {
    o.detail = fmt::format("{} rows; DASS n_neighbors=2: {:.3f}, kept {}, changed {}", rows, first.jaccard, first.kept,
                           first.changed);
  }
  return o;
}

Outcome two_item_identity() {
  Outcome o;
  const auto t0 = Clock::now();
  std::string detail;
  for (auto [target, expected_alpha] : {std::pair{0.417, 0.588}, std::pair{0.720, 0.837}}) {
    const auto m = testing::bivariate_sampled(400000, target, 17);
    std::vector<double> x(m.rows()), y(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
      x[i] = m(i, 0);
      y[i] = m(i, 1);
    }
    const double r = pearson(x, y);
    const auto c = citc(m);
    const double alpha = cronbach_alpha(m);
    o.require(std::abs(r - target) <= 0.002, fmt::format("sample r {:.4f} for target {}", r, target));
    o.require(std::abs(c[0] - r) < 1e-9 && std::abs(c[1] - r) < 1e-9,
              fmt::format("CITC {:.6f}/{:.6f} vs r {:.6f}", c[0], c[1], r));
    o.require(std::abs(alpha - 2 * r / (1 + r)) < 1e-6, fmt::format("alpha {:.6f} vs 2r/(1+r)", alpha));
    o.require(std::abs(alpha - expected_alpha) <= 0.003, fmt::format("alpha {:.4f} vs {}", alpha, expected_alpha));
    detail += fmt::format("r={:.4f} alpha={:.4f} ", r, alpha);
  }
  const double elapsed = seconds_since(t0);
  o.require(elapsed < 1.0, fmt::format("took {:.3f} s", elapsed));
  if (o.pass) o.detail = detail + fmt::format("({:.3f} s)", elapsed);
  return o;
}

Outcome hdbscan_oracle() {
  Outcome o;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const std::size_t n = 2 + seed % 9;
    const auto pts = testing::blobs({{0, 0, 0}}, n, 1.0, seed);
    const auto steps = single_linkage(mutual_reachability_mst(pts, core_distances(pts, 1)), n);
    const auto naive = testing::naive_single_linkage(pts);
    o.require(steps.size() == naive.size(), fmt::format("seed {}: step count", seed));
    std::vector<std::set<std::size_t>> members;
    for (std::size_t i = 0; i < n; ++i) members.push_back({i});
    for (std::size_t s = 0; s < std::min(steps.size(), naive.size()); ++s) {
      auto merged = members[steps[s].left];
      merged.insert(members[steps[s].right].begin(), members[steps[s].right].end());
      members.push_back(merged);
      o.require(merged == naive[s].members && std::abs(steps[s].distance - naive[s].distance) < 1e-12,
                fmt::format("seed {} step {} differs", seed, s));
    }
  }
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::vector<int> truth;
    const auto pts = testing::blobs({{0, 0, 0}, {10, 10, 10}}, 12, 0.7, seed, &truth);
    const auto a = hdbscan(pts, {4, 1});
    o.require(a.n_clusters() == 2, fmt::format("seed {}: {} clusters", seed, a.n_clusters()));
    if (a.n_clusters() == 2) {
      const auto ari = adjusted_rand_index(a.labels, truth);
      o.require(ari.value == 1.0 && ari.excluded == 0, fmt::format("seed {}: ARI {:.3f}", seed, ari.value));
    }
  }
  if (o.pass) o.detail = "N<=10 dendrograms edge-for-edge over 40 seeds; two blobs ARI 1.0 over 20 seeds";
  return o;
}

Outcome degenerate_clustering() {
  Outcome o;
  const auto chain = hdbscan(testing::grouped_line({0, 10, 17, 22, 25.5}), {6, 1});
  o.require(chain.all_noise(), "chained 5x4 geometry was not all noise");

  auto corpus = testing::load_fixture("epoch_zh.csv");
  PipelineConfig config;
  config.min_cluster_size = 6;
  config.seed = 42;
  const auto result = run_pipeline(corpus, config);
  o.require(result.status == kStatusUnassigned,
            fmt::format("20-item scale gave status {} with {} topics", result.status, result.model.topics.size()));
  o.require(result.model.outliers.size() == corpus.size(), "not every item is an outlier");
  if (o.pass) o.detail = "chained groups all noise; 20-item 5x4 scale at seed 42 unassigned";
  return o;
}

Outcome umap_calibration() {
  Outcome o;
  double worst = 0.0;
  for (std::size_t n_neighbors : {3, 5, 10, 15}) {
    const auto pts = testing::blobs({{0, 0, 0, 0, 0, 0}, {4, 4, 4, 0, 0, 0}, {0, 0, 4, 4, 4, 4}}, 15, 1.0, n_neighbors);
    const auto graph = build_knn(pts, n_neighbors - 1);
    const auto aff = fuzzy_simplicial_set(graph);
    const double target = std::log2(static_cast<double>(n_neighbors));
    for (std::size_t i = 0; i < graph.size(); ++i) {
      double sum = 0.0;
      for (double d : graph.distances[i]) sum += std::exp(-std::max(0.0, d - aff.rho[i]) / aff.sigma[i]);
      worst = std::max(worst, std::abs(sum - target));
    }
    const auto dense = aff.dense();
    o.require(dense == dense.transposed(), fmt::format("affinity not symmetric at n_neighbors={}", n_neighbors));
  }
  o.require(worst <= 1e-4, fmt::format("calibration residual {:.3e}", worst));

  const auto pts = testing::blobs({{0, 0, 0, 0}, {5, 5, 5, 5}}, 20, 1.0, 3);
  const auto aff = fuzzy_simplicial_set(build_knn(pts, 2));
  UmapOptions opts;
  opts.seed = 42;
  const auto a = optimize_layout(aff, opts), b = optimize_layout(aff, opts);
  o.require(a.coords == b.coords, "layouts differ between runs at seed 42");

  const auto corpus = testing::synthetic_corpus();
  const auto r1 = run_pipeline(corpus, PipelineConfig{}), r2 = run_pipeline(corpus, PipelineConfig{});
  o.require(r1.cluster_layout.coords == r2.cluster_layout.coords, "pipeline layouts differ at seed 42");
  if (o.pass) o.detail = fmt::format("max residual {:.1e}; symmetric; layouts bit-identical", worst);
  return o;
}

Outcome ctfidf_oracle() {
  Outcome o;
  const std::vector<std::vector<std::string>> classes{
      {"happy", "happy", "fun"}, {"calm", "relax", "calm", "happy"}, {"fun", "calm"}};
  const auto w = ctfidf(classes);
  // A = 9 / 3 = 3; f = {happy 3, fun 2, calm 3, relax 1}.
  const double l2 = std::log(1.0 + 3.0 / 3.0), l25 = std::log(1.0 + 3.0 / 2.0), l4 = std::log(1.0 + 3.0 / 1.0);
  const std::vector<TermVector> expected{
      {{"happy", 2 * l2}, {"fun", l25}},
      {{"calm", 2 * l2}, {"relax", l4}, {"happy", l2}},
      {{"fun", l25}, {"calm", l2}},
  };
  double worst = 0.0;
  o.require(w.size() == expected.size(), "class count");
  for (std::size_t c = 0; c < std::min(w.size(), expected.size()); ++c) {
    o.require(w[c].size() == expected[c].size(), fmt::format("class {} term count", c));
    for (const auto& [term, value] : expected[c]) {
      const auto it = w[c].find(term);
      o.require(it != w[c].end(), fmt::format("class {} lacks {}", c, term));
      if (it != w[c].end()) worst = std::max(worst, std::abs(it->second - value));
    }
  }
  o.require(worst <= 1e-12, fmt::format("max deviation {:.3e}", worst));

  const auto kw = top_keywords(w[1], 3);
  o.require(kw.size() == 3 && kw[0].term == "calm" && kw[1].term == "relax" && kw[2].term == "happy",
            "tied weights not in lexicographic order");
  const auto short_vocab = top_keywords(w[2], 3);
  o.require(short_vocab.size() == 2, "vocabulary shorter than n");
  if (o.pass) o.detail = fmt::format("max deviation {:.1e}; ties lexicographic", worst);
  return o;
}

Outcome end_to_end() {
  Outcome o;
  const auto corpus = testing::synthetic_corpus();
  PipelineConfig config;
  config.nr_topics = 5;
  config.k_per_topic = 2;
  const auto t0 = Clock::now();
  const auto result = run_pipeline(corpus, config);
  const double elapsed = seconds_since(t0);
  o.require(result.status == kStatusOk, "status " + result.status);
  o.require(result.model.topics.size() == 5, fmt::format("{} topics", result.model.topics.size()));
  std::vector<std::string> labels;
  for (const auto& item : corpus.items) labels.push_back(*item.factor_label);
  const auto ari = adjusted_rand_index(result.assignment.labels, encode_labels(labels));
  o.require(ari.value == 1.0 && ari.excluded == 0, fmt::format("ARI {:.3f} ({} excluded)", ari.value, ari.excluded));
  o.require(result.model.selected_ids().size() == 10,
            fmt::format("{} representatives", result.model.selected_ids().size()));
  o.require(elapsed < 10.0, fmt::format("took {:.2f} s", elapsed));
  if (o.pass) o.detail = fmt::format("5 topics, ARI 1.0, 10 representatives, {:.3f} s", elapsed);
  return o;
}

Outcome geometry() {
  Outcome o;
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng.below(25);
    std::vector<Point2> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5)});
    const auto hull = convex_hull(pts);
    for (const auto& p : pts) o.require(hull_contains(hull, p, 1e-9), fmt::format("trial {}: member outside", trial));
    // O(n^3) oracle: every hull edge has all points on its left.
    for (std::size_t e = 0; e < hull.size(); ++e) {
      const auto a = hull[e], b = hull[(e + 1) % hull.size()];
      for (const auto& p : pts) {
        const double side = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        o.require(side >= -1e-9, fmt::format("trial {}: hull edge {} has a point on its right", trial, e));
      }
    }
    std::size_t extreme = 0;
    for (std::size_t i = 0; i < n; ++i) {
      bool inside = false;
      for (std::size_t a = 0; a < n && !inside; ++a)
        for (std::size_t b = a + 1; b < n && !inside; ++b)
          for (std::size_t c = b + 1; c < n && !inside; ++c) {
            if (a == i || b == i || c == i) continue;
            const auto cr = [](Point2 p, Point2 q, Point2 r) {
              return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
            };
            const double d1 = cr(pts[a], pts[b], pts[i]), d2 = cr(pts[b], pts[c], pts[i]),
                         d3 = cr(pts[c], pts[a], pts[i]);
            inside = (d1 >= 0 && d2 >= 0 && d3 >= 0) || (d1 <= 0 && d2 <= 0 && d3 <= 0);
          }
      if (!inside) ++extreme;
    }
    o.require(extreme == hull.size(), fmt::format("trial {}: {} hull vertices vs {} extreme points", trial,
                                                  hull.size(), extreme));
  }

  const auto e = ellipse_from_covariance({0, 0}, 4.0, 0.0, 1.0, 1.0);
  o.require(e && std::abs(e->major - 2.0) < 1e-9 && std::abs(e->minor - 1.0) < 1e-9, "diag(4,1) semi-axes");

  const auto result = run_pipeline(testing::synthetic_corpus(), [] {
    PipelineConfig c;
    c.nr_topics = 5;
    return c;
  }());
  const auto svg = render_svg(result.scene);
  const auto again = render_svg(scene_from_json(nlohmann::json::parse(scene_to_json(result.scene).dump())));
  o.require(svg == render_svg(result.scene) && svg == again, "SVG bytes differ on re-render");
  if (o.pass) o.detail = "100 hulls match the oracle; semi-axes (2, 1); SVG re-render identical";
  return o;
}

Outcome service_contract() {
  Outcome o;
  nlohmann::json items = nlohmann::json::array();
  for (const auto& item : testing::synthetic_corpus().items) {
    items.push_back({{"id", item.id}, {"factor", *item.factor_label}, {"text", item.text}});
  }
  const nlohmann::json request{{"items", items}, {"config", {{"nr_topics", 5}}}};

  Service service;
  const auto first = service.handle("POST", "/run", request.dump());
  const auto second = service.handle("POST", "/run", request.dump());
  Service fresh;
  const auto third = fresh.handle("POST", "/run", request.dump());
  o.require(first.status == 200 && second.status == 200 && third.status == 200, "run failed");
  if (o.pass) {
    const auto a = nlohmann::json::parse(first.body), b = nlohmann::json::parse(second.body),
               c = nlohmann::json::parse(third.body);
    o.require(b["cached"] == true && a["id"] == b["id"] && a["result"] == b["result"], "cache hit differs");
    o.require(a["id"] == c["id"] && a["result"].dump() == c["result"].dump(), "fresh run differs");
    const auto fetched = service.handle("GET", "/runs/" + a["id"].get<std::string>(), "");
    o.require(fetched.status == 200, "stored run not retrievable");
  }

  auto bad = request;
  bad["config"]["min_prob"] = 1.5;
  const auto rejected = service.handle("POST", "/run", bad.dump());
  o.require(rejected.status == 400, fmt::format("invalid config gave HTTP {}", rejected.status));
  o.require(nlohmann::json::parse(rejected.body).value("field", "") == "config.min_prob", "missing field path");
  if (o.pass) o.detail = "deterministic ids and payloads, cache hit identical, 400 at config.min_prob, no webui";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"ari-oracle", ari_oracle},
      {"jaccard-table-rows", jaccard_rows},
      {"two-item-subscale", two_item_identity},
      {"hdbscan-oracle", hdbscan_oracle},
      {"degenerate-unassigned", degenerate_clustering},
      {"umap-calibration", umap_calibration},
      {"ctfidf-oracle", ctfidf_oracle},
      {"end-to-end-recovery", end_to_end},
      {"geometry", geometry},
      {"service-contract", service_contract},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << "\n";
    if (!o.pass) ++failures;
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failures),
                           criteria.size());
  return failures == 0 ? 0 : 1;
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "semshort/cluster.hpp"
#include "semshort/metrics.hpp"
#include "support.hpp"

using namespace semshort;

namespace {

Matrix column(std::initializer_list<double> xs) {
  std::vector<std::vector<double>> rows;
  for (double x : xs) rows.push_back({x});
  return Matrix::from_rows(rows);
}

double mreach(const Matrix& pts, const std::vector<double>& cores, std::size_t a, std::size_t b) {
  return std::max({cores[a], cores[b], euclidean_distance(pts.row(a), pts.row(b))});
}

/// Minimum spanning tree weight by decoding every Pruefer sequence.
double brute_force_mst_weight(const Matrix& pts, const std::vector<double>& cores) {
  const std::size_t n = pts.rows();
  std::vector<std::size_t> seq(n - 2, 0);
  double best = INFINITY;
  while (true) {
    std::vector<std::size_t> degree(n, 1);
    for (auto s : seq) ++degree[s];
    double total = 0.0;
    for (auto s : seq) {
      for (std::size_t leaf = 0; leaf < n; ++leaf) {
        if (degree[leaf] == 1) {
          total += mreach(pts, cores, leaf, s);
          --degree[leaf];
          --degree[s];
          break;
        }
      }
    }
    std::vector<std::size_t> last;
    for (std::size_t v = 0; v < n; ++v)
      if (degree[v] == 1) last.push_back(v);
    total += mreach(pts, cores, last[0], last[1]);
    best = std::min(best, total);

    std::size_t pos = 0;
    while (pos < seq.size() && ++seq[pos] == n) seq[pos++] = 0;
    if (pos == seq.size()) break;
  }
  return best;
}

}  // namespace

TEST_CASE("core distances") {
  const auto pts = column({0, 1, 3});
  CHECK(core_distances(pts, 1) == std::vector<double>{1, 1, 2});
  CHECK(core_distances(pts, 2) == std::vector<double>{3, 2, 3});
  CHECK(core_distances(column({2, 2, 7}), 1) == std::vector<double>{0, 0, 5});
  CHECK_THROWS_AS(core_distances(pts, 3), Error);
  CHECK_THROWS_AS(core_distances(pts, 0), Error);

  const auto cloud = testing::blobs({{0, 0, 0}}, 15, 1.0, 6);
  auto previous = core_distances(cloud, 1);
  for (std::size_t m = 2; m < 15; ++m) {
    const auto next = core_distances(cloud, m);
    for (std::size_t i = 0; i < 15; ++i) CHECK(next[i] >= previous[i]);
    previous = next;
  }
}

TEST_CASE("mutual reachability MST") {
  const auto two = Matrix::from_rows({{0, 0}, {3, 4}});
  const auto cores = std::vector<double>{6, 1};
  const auto mst = mutual_reachability_mst(two, cores);
  REQUIRE(mst.size() == 1);
  CHECK(mst[0].weight == 6.0);

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto pts = testing::blobs({{0, 0}}, 5, 2.0, seed);
    for (std::size_t ms : {1u, 2u, 3u}) {
      const auto c = core_distances(pts, ms);
      const auto edges = mutual_reachability_mst(pts, c);
      CHECK(edges.size() == 4);
      double total = 0.0;
      for (const auto& e : edges) {
        CHECK(e.a < e.b);
        total += e.weight;
      }
      CHECK(total == doctest::Approx(brute_force_mst_weight(pts, c)).epsilon(1e-12));
      CHECK(std::is_sorted(edges.begin(), edges.end(),
                           [](const MstEdge& x, const MstEdge& y) { return x.weight < y.weight; }));
    }
  }
}

TEST_CASE("dendrogram equals brute-force single linkage") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::size_t n = 3 + seed % 8;
    const auto pts = testing::blobs({{0, 0, 0}}, n, 1.0, seed);
    const auto steps = single_linkage(mutual_reachability_mst(pts, core_distances(pts, 1)), n);
    const auto naive = testing::naive_single_linkage(pts);
    REQUIRE(steps.size() == naive.size());
    std::vector<std::set<std::size_t>> members;
    for (std::size_t i = 0; i < n; ++i) members.push_back({i});
    for (std::size_t s = 0; s < steps.size(); ++s) {
      std::set<std::size_t> merged = members[steps[s].left];
      merged.insert(members[steps[s].right].begin(), members[steps[s].right].end());
      members.push_back(merged);
      CHECK(steps[s].distance == doctest::Approx(naive[s].distance).epsilon(1e-12));
      CHECK(steps[s].size == merged.size());
      CHECK(merged == naive[s].members);
    }
  }
}

TEST_CASE("condensed tree shapes") {
  SUBCASE("one tight blob") {
    const auto pts = testing::blobs({{0, 0}}, 8, 0.1, 3);
    CondensedTree tree;
    const auto a = hdbscan(pts, {5, 1}, &tree);
    CHECK(tree.cluster_ids() == std::vector<std::size_t>{8});
    CHECK(tree.nodes.size() == 8);
    CHECK(a.all_noise());
  }
  SUBCASE("two blobs split the root in two") {
    const auto pts = testing::blobs({{0, 0}, {20, 20}}, 6, 0.5, 4);
    CondensedTree tree;
    hdbscan(pts, {3, 1}, &tree);
    std::size_t root_clusters = 0;
    for (const auto& node : tree.nodes)
      if (node.parent == tree.root() && node.child >= tree.n_points) ++root_clusters;
    CHECK(root_clusters == 2);
  }
  SUBCASE("min_cluster_size above N") {
    const auto pts = testing::blobs({{0, 0}, {20, 20}}, 4, 0.5, 5);
    CondensedTree tree;
    const auto a = hdbscan(pts, {9, 1}, &tree);
    CHECK(tree.cluster_ids().size() == 1);
    CHECK(a.all_noise());
    for (double p : a.probabilities) CHECK(p == 0.0);
  }
}

TEST_CASE("condensed tree invariants") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto pts = testing::blobs({{0, 0}, {6, 0}, {0, 6}}, 7, 1.0, seed);
    CondensedTree tree;
    hdbscan(pts, {3, 2}, &tree);
    std::map<std::size_t, double> birth{{tree.root(), 0.0}};
    for (const auto& node : tree.nodes) {
      CHECK(node.lambda_val >= 0.0);
      CHECK(node.lambda_val >= birth.at(node.parent));
      if (node.child >= tree.n_points) {
        CHECK(node.child_size >= 3);
        birth[node.child] = node.lambda_val;
      } else {
        CHECK(node.child_size == 1);
      }
    }
    CHECK(tree.to_csv().rfind("parent,child,lambda,size\n", 0) == 0);
  }
}

TEST_CASE("two blobs give two clusters with perfect agreement") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::vector<int> truth;
    const auto pts = testing::blobs({{0, 0, 0}, {10, 10, 10}}, 8, 0.7, seed, &truth);
    // At min_cluster_size 2 excess of mass splits Gaussian blobs into sub-clusters.
    const auto a = hdbscan(pts, {4, 1});
    CHECK(a.n_clusters() == 2);
    CHECK(adjusted_rand_index(a.labels, truth).value == 1.0);
  }
}

TEST_CASE("uniform noise at min_cluster_size N/2 yields at most one cluster") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> rows(20, std::vector<double>(2));
    for (auto& r : rows)
      for (auto& v : r) v = rng.uniform();
    const auto a = hdbscan(Matrix::from_rows(rows), {10, 1});
    CHECK(a.n_clusters() <= 1);
  }
}

TEST_CASE("membership probabilities and label order") {
  const auto pts = testing::blobs({{0, 0}, {30, 0}}, 5, 1.0, 7);
  auto rows = pts.to_rows();
  for (int i = 0; i < 4; ++i) rows.push_back({30.0 + 0.3 * i, 0.2});
  const auto a = hdbscan(Matrix::from_rows(rows), {2, 1});
  REQUIRE(a.n_clusters() >= 2);
  for (std::size_t c = 0; c < a.n_clusters(); ++c) {
    double top = 0.0;
    for (auto i : a.members(static_cast<int>(c))) {
      CHECK(a.probabilities[i] > 0.0);
      CHECK(a.probabilities[i] <= 1.0);
      top = std::max(top, a.probabilities[i]);
    }
    CHECK(top == 1.0);
    if (c > 0) {
      const auto prev = a.members(static_cast<int>(c - 1)), cur = a.members(static_cast<int>(c));
      CHECK((prev.size() > cur.size() || (prev.size() == cur.size() && prev.front() < cur.front())));
    }
  }
  for (std::size_t i = 0; i < a.labels.size(); ++i)
    if (a.labels[i] < 0) CHECK(a.probabilities[i] == 0.0);
}

TEST_CASE("duplicates belong maximally") {
  const auto a = hdbscan(Matrix::from_rows({{0, 0}, {0, 0}, {0, 0}, {9, 9}, {9, 9}, {9, 9}}), {2, 1});
  CHECK(a.n_clusters() == 2);
  for (double p : a.probabilities) CHECK(p == 1.0);
}

TEST_CASE("groups of four with min_cluster_size six") {
  // Groups peel off one at a time: no split leaves six points on both sides.
  const auto chain = hdbscan(testing::grouped_line({0, 10, 17, 22, 25.5}), {6, 1});
  CHECK(chain.all_noise());
  // Two pairs of groups merge first, so clusters of eight survive.
  const auto pairs = hdbscan(testing::grouped_line({0, 1, 20, 21, 45}), {6, 1});
  CHECK(pairs.n_clusters() == 2);
  CHECK(hdbscan(testing::grouped_line({0, 10, 17, 22, 25.5}), {4, 1}).n_clusters() == 5);
}

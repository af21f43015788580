#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "semshort/matrix.hpp"

namespace semshort {

/// Lambda assigned to zero distances (duplicates).
inline constexpr double kLambdaCap = 1e12;

/// Distance to the min_samples-th nearest neighbour, self excluded.
std::vector<double> core_distances(const Matrix& points, std::size_t min_samples);

struct MstEdge {
  std::size_t a = 0;  // a < b
  std::size_t b = 0;
  double weight = 0.0;

  friend bool operator==(const MstEdge&, const MstEdge&) = default;
};

/// Prim's algorithm on the complete mutual-reachability graph
/// max(core_a, core_b, d(a, b)). Returned edges are sorted ascending by
/// (weight, a, b); equal-weight candidates are taken in (a, b) order.
std::vector<MstEdge> mutual_reachability_mst(const Matrix& points, const std::vector<double>& cores);

/// Single-linkage merge step: clusters `left` and `right` (point ids < N,
/// merged nodes N + step) joined at `distance`.
struct LinkageStep {
  std::size_t left = 0;
  std::size_t right = 0;
  double distance = 0.0;
  std::size_t size = 0;
};

/// Union-find dendrogram from an MST sorted ascending by weight.
std::vector<LinkageStep> single_linkage(const std::vector<MstEdge>& mst, std::size_t n_points);

struct CondensedNode {
  std::size_t parent = 0;  // cluster id (>= N)
  std::size_t child = 0;   // point id (< N) or cluster id
  double lambda_val = 0.0;
  std::size_t child_size = 0;

  friend bool operator==(const CondensedNode&, const CondensedNode&) = default;
};

/// Condensed cluster hierarchy. Cluster ids start at n_points (the root).
struct CondensedTree {
  std::vector<CondensedNode> nodes;
  std::size_t n_points = 0;
  std::size_t min_cluster_size = 0;

  [[nodiscard]] std::size_t root() const noexcept { return n_points; }
  [[nodiscard]] std::vector<std::size_t> cluster_ids() const;
  [[nodiscard]] std::string to_csv() const;
};

CondensedTree condense(const std::vector<MstEdge>& mst, std::size_t n_points, std::size_t min_cluster_size);

struct ClusterAssignment {
  std::vector<int> labels;             // -1 = noise, otherwise 0..C-1
  std::vector<double> probabilities;   // 0 for noise
  std::vector<double> stabilities;     // per label

  [[nodiscard]] std::size_t n_clusters() const noexcept { return stabilities.size(); }
  [[nodiscard]] std::vector<std::size_t> members(int label) const;
  [[nodiscard]] bool all_noise() const;

  friend bool operator==(const ClusterAssignment&, const ClusterAssignment&) = default;
};

/// Excess-of-mass selection over the condensed tree (root never selected).
/// Labels are ordered by descending size, then lowest member index.
ClusterAssignment extract_clusters(const CondensedTree& tree);

struct HdbscanOptions {
  std::size_t min_cluster_size = 2;
  std::size_t min_samples = 1;
};

/// core_distances -> mutual_reachability_mst -> condense -> extract_clusters.
ClusterAssignment hdbscan(const Matrix& points, const HdbscanOptions& options, CondensedTree* tree_out = nullptr);

}  // namespace semshort

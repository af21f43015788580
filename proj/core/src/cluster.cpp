#include "semshort/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

#include <fmt/format.h>

#include "semshort/error.hpp"

namespace semshort {

namespace {

double to_lambda(double distance) { return distance > 0.0 ? std::min(1.0 / distance, kLambdaCap) : kLambdaCap; }

}  // namespace

std::vector<double> core_distances(const Matrix& points, std::size_t min_samples) {
  const std::size_t n = points.rows();
  if (min_samples < 1 || min_samples >= n) {
    throw Error(ErrorCode::invalid_config,
                fmt::format("min_samples must satisfy 1 <= min_samples < N (min_samples={}, N={})", min_samples, n),
                "config.min_samples");
  }
  const Matrix dist = pairwise_distances(points);
  std::vector<double> cores(n);
  std::vector<double> row;
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) row.push_back(dist(i, j));
    std::nth_element(row.begin(), row.begin() + static_cast<long>(min_samples - 1), row.end());
    cores[i] = row[min_samples - 1];
  }
  return cores;
}

std::vector<MstEdge> mutual_reachability_mst(const Matrix& points, const std::vector<double>& cores) {
  const std::size_t n = points.rows();
  if (cores.size() != n) throw Error(ErrorCode::invalid_input, "core distance count does not match points");
  std::vector<MstEdge> edges;
  if (n < 2) return edges;

  auto reach = [&](std::size_t i, std::size_t j) {
    return std::max({cores[i], cores[j], euclidean_distance(points.row(i), points.row(j))});
  };
  auto key = [](std::size_t i, std::size_t j) { return std::pair{std::min(i, j), std::max(i, j)}; };

  std::vector<bool> in_tree(n, false);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> from(n, 0);
  in_tree[0] = true;
  for (std::size_t j = 1; j < n; ++j) best[j] = reach(0, j);

  for (std::size_t step = 1; step < n; ++step) {
    std::size_t pick = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      if (pick == n || best[j] < best[pick] || (best[j] == best[pick] && key(from[j], j) < key(from[pick], pick))) {
        pick = j;
      }
    }
    in_tree[pick] = true;
    const auto [a, b] = key(from[pick], pick);
    edges.push_back({a, b, best[pick]});
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double w = reach(pick, j);
      if (w < best[j] || (w == best[j] && key(pick, j) < key(from[j], j))) {
        best[j] = w;
        from[j] = pick;
      }
    }
  }
  std::sort(edges.begin(), edges.end(), [](const MstEdge& x, const MstEdge& y) {
    return std::tie(x.weight, x.a, x.b) < std::tie(y.weight, y.a, y.b);
  });
  return edges;
}

std::vector<LinkageStep> single_linkage(const std::vector<MstEdge>& mst, std::size_t n_points) {
  std::vector<std::size_t> parent(2 * n_points), size(2 * n_points, 1);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<LinkageStep> steps;
  steps.reserve(mst.size());
  std::size_t next = n_points;
  for (const auto& e : mst) {
    const std::size_t ra = find(e.a), rb = find(e.b);
    if (ra == rb) throw Error(ErrorCode::invalid_input, "edge list contains a cycle; not a spanning tree");
    steps.push_back({ra, rb, e.weight, size[ra] + size[rb]});
    parent[ra] = parent[rb] = next;
    size[next] = size[ra] + size[rb];
    ++next;
  }
  return steps;
}

std::vector<std::size_t> CondensedTree::cluster_ids() const {
  std::vector<std::size_t> ids{root()};
  for (const auto& node : nodes)
    if (node.child >= n_points) ids.push_back(node.child);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::string CondensedTree::to_csv() const {
  std::string out = "parent,child,lambda,size\n";
  for (const auto& node : nodes)
    out += fmt::format("{},{},{:.17g},{}\n", node.parent, node.child, node.lambda_val, node.child_size);
  return out;
}

CondensedTree condense(const std::vector<MstEdge>& mst, std::size_t n_points, std::size_t min_cluster_size) {
  CondensedTree tree;
  tree.n_points = n_points;
  tree.min_cluster_size = min_cluster_size;
  if (n_points < 2) return tree;
  if (mst.size() != n_points - 1) throw Error(ErrorCode::invalid_input, "MST must have N - 1 edges");
  for (std::size_t i = 1; i < mst.size(); ++i)
    if (mst[i].weight < mst[i - 1].weight) throw Error(ErrorCode::invalid_input, "MST must be sorted by weight");

  const auto linkage = single_linkage(mst, n_points);
  auto node_size = [&](std::size_t node) { return node < n_points ? std::size_t{1} : linkage[node - n_points].size; };
  auto leaves_of = [&](std::size_t node) {
    std::vector<std::size_t> out;
    std::vector<std::size_t> stack{node};
    while (!stack.empty()) {
      const std::size_t x = stack.back();
      stack.pop_back();
      if (x < n_points) {
        out.push_back(x);
      } else {
        stack.push_back(linkage[x - n_points].right);
        stack.push_back(linkage[x - n_points].left);
      }
    }
    return out;
  };

  const std::size_t root = 2 * n_points - 2;
  std::vector<std::size_t> relabel(2 * n_points - 1, 0);
  relabel[root] = n_points;
  std::size_t next_label = n_points + 1;

  // Breadth-first over internal nodes that still belong to some cluster.
  std::deque<std::size_t> queue{root};
  while (!queue.empty()) {
    const std::size_t node = queue.front();
    queue.pop_front();
    const auto& step = linkage[node - n_points];
    const double lambda = to_lambda(step.distance);
    const std::size_t left = step.left, right = step.right;
    const std::size_t left_count = node_size(left), right_count = node_size(right);
    const std::size_t label = relabel[node];

    auto fall_out = [&](std::size_t sub) {
      for (std::size_t p : leaves_of(sub)) tree.nodes.push_back({label, p, lambda, 1});
    };
    auto continue_as = [&](std::size_t sub, std::size_t new_label) {
      relabel[sub] = new_label;
      if (sub >= n_points) queue.push_back(sub);
    };

    if (left_count >= min_cluster_size && right_count >= min_cluster_size) {
      const std::size_t l = next_label++;
      const std::size_t r = next_label++;
      tree.nodes.push_back({label, l, lambda, left_count});
      tree.nodes.push_back({label, r, lambda, right_count});
      continue_as(left, l);
      continue_as(right, r);
    } else if (left_count < min_cluster_size && right_count < min_cluster_size) {
      fall_out(left);
      fall_out(right);
    } else if (left_count < min_cluster_size) {
      fall_out(left);
      continue_as(right, label);
    } else {
      fall_out(right);
      continue_as(left, label);
    }
  }
  return tree;
}

std::vector<std::size_t> ClusterAssignment::members(int label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) out.push_back(i);
  return out;
}

bool ClusterAssignment::all_noise() const {
  return std::all_of(labels.begin(), labels.end(), [](int l) { return l < 0; });
}

ClusterAssignment extract_clusters(const CondensedTree& tree) {
  const std::size_t n = tree.n_points;
  ClusterAssignment out;
  out.labels.assign(n, -1);
  out.probabilities.assign(n, 0.0);
  if (tree.nodes.empty()) return out;

  std::map<std::size_t, double> birth{{tree.root(), 0.0}};
  std::map<std::size_t, std::size_t> cluster_parent;
  std::map<std::size_t, std::vector<std::size_t>> children;
  std::map<std::size_t, double> death;  // max lambda over direct rows
  std::vector<std::size_t> point_cluster(n, tree.root());
  std::vector<double> point_lambda(n, 0.0);
  for (const auto& node : tree.nodes) {
    death[node.parent] = std::max(death[node.parent], node.lambda_val);
    if (node.child >= n) {
      birth[node.child] = node.lambda_val;
      cluster_parent[node.child] = node.parent;
      children[node.parent].push_back(node.child);
    } else {
      point_cluster[node.child] = node.parent;
      point_lambda[node.child] = node.lambda_val;
    }
  }
  std::map<std::size_t, double> stability;
  for (const auto& [c, b] : birth) stability[c] = 0.0;
  for (const auto& node : tree.nodes)
    stability[node.parent] += (node.lambda_val - birth[node.parent]) * static_cast<double>(node.child_size);
  const auto own_stability = stability;

  // Excess of mass, deepest clusters first; the root is never selectable.
  std::map<std::size_t, bool> selected;
  for (const auto& [c, s] : stability) selected[c] = c != tree.root();
  for (auto it = stability.rbegin(); it != stability.rend(); ++it) {
    const std::size_t c = it->first;
    if (c == tree.root()) continue;
    const auto kids = children.find(c);
    if (kids == children.end() || kids->second.empty()) continue;
    double subtree = 0.0;
    for (std::size_t k : kids->second) subtree += stability[k];
    if (stability[c] > subtree) {
      std::vector<std::size_t> stack(kids->second);
      while (!stack.empty()) {
        const std::size_t x = stack.back();
        stack.pop_back();
        selected[x] = false;
        if (auto g = children.find(x); g != children.end()) stack.insert(stack.end(), g->second.begin(), g->second.end());
      }
    } else {
      selected[c] = false;
      stability[c] = subtree;
    }
  }

  // Each point joins its nearest selected ancestor.
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t p = 0; p < n; ++p) {
    std::size_t c = point_cluster[p];
    while (c != tree.root() && !selected[c]) c = cluster_parent[c];
    if (c != tree.root()) groups[c].push_back(p);
  }

  std::vector<std::pair<std::size_t, std::vector<std::size_t>>> ordered(groups.begin(), groups.end());
  std::sort(ordered.begin(), ordered.end(), [](const auto& x, const auto& y) {
    if (x.second.size() != y.second.size()) return x.second.size() > y.second.size();
    return x.second.front() < y.second.front();
  });
  for (std::size_t label = 0; label < ordered.size(); ++label) {
    const auto& [c, pts] = ordered[label];
    const double max_lambda = death[c];
    for (std::size_t p : pts) {
      out.labels[p] = static_cast<int>(label);
      out.probabilities[p] = max_lambda > 0.0 ? std::min(point_lambda[p], max_lambda) / max_lambda : 1.0;
    }
    out.stabilities.push_back(own_stability.at(c));
  }
  return out;
}

ClusterAssignment hdbscan(const Matrix& points, const HdbscanOptions& options, CondensedTree* tree_out) {
  if (options.min_cluster_size < 2) {
    throw Error(ErrorCode::invalid_config, "min_cluster_size must be >= 2", "config.min_cluster_size");
  }
  const auto cores = core_distances(points, options.min_samples);
  const auto mst = mutual_reachability_mst(points, cores);
  auto tree = condense(mst, points.rows(), options.min_cluster_size);
  auto assignment = extract_clusters(tree);
  if (tree_out) *tree_out = std::move(tree);
  return assignment;
}

}  // namespace semshort

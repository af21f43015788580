#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "semshort/reduce.hpp"

namespace semshort {

namespace {

// Neighbour order for row i: ascending distance, ties to the lower index, self excluded.
std::vector<std::size_t> ranked_neighbors(const Matrix& dist, std::size_t i) {
  std::vector<std::size_t> order;
  order.reserve(dist.rows());
  for (std::size_t j = 0; j < dist.rows(); ++j)
    if (j != i) order.push_back(j);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dist(i, a) < dist(i, b); });
  return order;
}

double membership_sum(const std::vector<double>& distances, double rho, double sigma) {
  double psum = 0.0;
  for (double d : distances) {
    const double excess = d - rho;
    psum += excess > 0.0 ? std::exp(-excess / sigma) : 1.0;
  }
  return psum;
}

}  // namespace

NeighborGraph build_knn(const Matrix& points, std::size_t k) {
  const std::size_t n = points.rows();
  if (k < 1 || k >= n) {
    throw Error(ErrorCode::invalid_config, fmt::format("k must satisfy 1 <= k < N (k={}, N={})", k, n),
                "config.n_neighbors");
  }
  const Matrix dist = pairwise_distances(points);
  NeighborGraph g;
  g.n_neighbors = k + 1;
  g.neighbor_ids.resize(n);
  g.distances.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto order = ranked_neighbors(dist, i);
    order.resize(k);
    g.distances[i].reserve(k);
    for (std::size_t j : order) g.distances[i].push_back(dist(i, j));
    g.neighbor_ids[i] = std::move(order);
  }
  return g;
}

double FuzzyAffinity::weight(std::size_t i, std::size_t j) const {
  const auto& row = rows.at(i);
  auto it = std::lower_bound(row.begin(), row.end(), j,
                             [](const AffinityEntry& e, std::size_t c) { return e.col < c; });
  return it != row.end() && it->col == j ? it->weight : 0.0;
}

Matrix FuzzyAffinity::dense() const {
  Matrix m(rows.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (const auto& e : rows[i]) m(i, e.col) = e.weight;
  return m;
}

FuzzyAffinity fuzzy_simplicial_set(const NeighborGraph& graph) {
  const std::size_t n = graph.size();
  FuzzyAffinity out;
  out.n_neighbors = graph.n_neighbors;
  out.rho.resize(n);
  out.sigma.resize(n);
  out.directed.resize(n);
  const double target = std::log2(static_cast<double>(graph.n_neighbors));

  for (std::size_t i = 0; i < n; ++i) {
    const auto& d = graph.distances[i];
    const double rho = d.empty() ? 0.0 : d.front();
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    double mid = 1.0;
    for (int iter = 0; iter < kSigmaSearchIterations; ++iter) {
      const double psum = membership_sum(d, rho, mid);
      if (std::abs(psum - target) < kSigmaSearchTolerance) break;
      if (psum > target) {
        hi = mid;
        mid = 0.5 * (lo + hi);
      } else {
        lo = mid;
        mid = std::isinf(hi) ? mid * 2.0 : 0.5 * (lo + hi);
      }
    }
    out.rho[i] = rho;
    out.sigma[i] = mid;
    out.directed[i].reserve(d.size());
    for (double dij : d) {
      const double excess = std::max(0.0, dij - rho);
      out.directed[i].push_back(excess > 0.0 ? std::exp(-excess / mid) : 1.0);
    }
  }

  std::vector<std::map<std::size_t, double>> directed(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < graph.neighbor_ids[i].size(); ++k)
      directed[i][graph.neighbor_ids[i][k]] = out.directed[i][k];

  out.rows.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::map<std::size_t, double> merged;
    for (const auto& [j, w] : directed[i]) merged[j];
    for (std::size_t j = 0; j < n; ++j)
      if (directed[j].contains(i)) merged[j];
    for (auto& [j, w] : merged) {
      const auto a_it = directed[i].find(j);
      const auto b_it = directed[j].find(i);
      const double a = a_it == directed[i].end() ? 0.0 : a_it->second;
      const double b = b_it == directed[j].end() ? 0.0 : b_it->second;
      // Written so that (i, j) and (j, i) evaluate the identical expression.
      const double lo_w = std::min(a, b), hi_w = std::max(a, b);
      w = hi_w + lo_w - hi_w * lo_w;
    }
    for (const auto& [j, w] : merged)
      if (w > 0.0) out.rows[i].push_back({j, w});
  }
  return out;
}

double calibration_residual(const NeighborGraph& graph, const FuzzyAffinity& affinity, std::size_t i) {
  const double target = std::log2(static_cast<double>(graph.n_neighbors));
  return membership_sum(graph.distances.at(i), affinity.rho.at(i), affinity.sigma.at(i)) - target;
}

std::size_t connected_components(const FuzzyAffinity& affinity) {
  const std::size_t n = affinity.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = n;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& e : affinity.rows[i]) {
      const auto a = find(i), b = find(e.col);
      if (a != b) {
        parent[std::max(a, b)] = std::min(a, b);
        --components;
      }
    }
  }
  return components;
}

double trustworthiness(const Matrix& high, const Matrix& low, std::size_t k) {
  const std::size_t n = high.rows();
  if (n != low.rows() || k < 1 || 2 * k >= n) {
    throw Error(ErrorCode::invalid_input, "trustworthiness needs matching rows and k < N/2");
  }
  const Matrix dh = pairwise_distances(high);
  const Matrix dl = pairwise_distances(low);
  double penalty = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto high_order = ranked_neighbors(dh, i);
    std::vector<std::size_t> rank(n, 0);
    for (std::size_t r = 0; r < high_order.size(); ++r) rank[high_order[r]] = r + 1;
    const auto low_order = ranked_neighbors(dl, i);
    for (std::size_t r = 0; r < k; ++r) {
      const std::size_t j = low_order[r];
      if (rank[j] > k) penalty += static_cast<double>(rank[j] - k);
    }
  }
  const double nn = static_cast<double>(n), kk = static_cast<double>(k);
  return 1.0 - 2.0 / (nn * kk * (2.0 * nn - 3.0 * kk - 1.0)) * penalty;
}

}  // namespace semshort

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "semshort/embed.hpp"
#include "semshort/error.hpp"
#include "semshort/matrix.hpp"

namespace semshort {

/// Exact k-nearest-neighbour lists. `n_neighbors` follows the UMAP
/// convention and counts the point itself, so each row holds
/// n_neighbors - 1 real neighbours.
struct NeighborGraph {
  std::size_t n_neighbors = 0;
  std::vector<std::vector<std::size_t>> neighbor_ids;
  std::vector<std::vector<double>> distances;  // ascending per row

  [[nodiscard]] std::size_t size() const noexcept { return neighbor_ids.size(); }
  [[nodiscard]] std::size_t k() const noexcept { return neighbor_ids.empty() ? 0 : neighbor_ids.front().size(); }
};

/// k real neighbours per point (1 <= k < N), Euclidean, ties to the lower index.
NeighborGraph build_knn(const Matrix& points, std::size_t k);

struct AffinityEntry {
  std::size_t col;
  double weight;
};

/// Symmetric fuzzy membership graph with the per-point calibration data.
struct FuzzyAffinity {
  std::vector<std::vector<AffinityEntry>> rows;      // symmetrised, sorted by col
  std::vector<std::vector<double>> directed;         // per-graph-row strengths, before union
  std::vector<double> rho;
  std::vector<double> sigma;
  std::size_t n_neighbors = 0;

  [[nodiscard]] std::size_t size() const noexcept { return rows.size(); }
  [[nodiscard]] double weight(std::size_t i, std::size_t j) const;
  [[nodiscard]] Matrix dense() const;
};

inline constexpr int kSigmaSearchIterations = 64;
inline constexpr double kSigmaSearchTolerance = 1e-5;

/// rho_i = nearest distance; sigma_i by bisection so that
/// sum_j exp(-max(0, d_ij - rho_i) / sigma_i) = log2(n_neighbors);
/// strengths combined by probabilistic union a + b - ab.
FuzzyAffinity fuzzy_simplicial_set(const NeighborGraph& graph);

/// Residual of the calibration identity for point i.
double calibration_residual(const NeighborGraph& graph, const FuzzyAffinity& affinity, std::size_t i);

struct CurveParams {
  double a = 0.0;
  double b = 0.0;
  double rmse = 0.0;
};

/// Least-squares fit (Levenberg-Marquardt) of 1/(1 + a x^(2b)) to the
/// min_dist/spread target on 300 samples of [0, 3 spread].
CurveParams fit_curve(double min_dist, double spread = 1.0);

struct Layout {
  Matrix coords;
  std::size_t n_components = 0;
  double curve_a = 0.0;
  double curve_b = 0.0;
  std::uint64_t seed = 0;
  int epochs = 0;
  std::string init;  // "spectral", "random", "gaussian"

  friend bool operator==(const Layout&, const Layout&) = default;
};

struct UmapOptions {
  std::size_t n_components = 5;
  double min_dist = 0.0;
  double spread = 1.0;
  int epochs = 500;
  int negative_sample_rate = 5;
  double repulsion_strength = 1.0;
  double learning_rate = 1.0;
  std::uint64_t seed = 42;
};

/// Negative-sampling SGD on the fuzzy graph. Spectral initialisation when
/// the graph is connected (and N > n_components + 1), otherwise seeded
/// uniform in [-10, 10]^m; the chosen mode is reported via `warnings`.
/// Single-threaded and bit-reproducible for a fixed seed.
Layout optimize_layout(const FuzzyAffinity& affinity, const UmapOptions& options, Warnings* warnings = nullptr);

/// Number of connected components of the symmetrised affinity graph.
std::size_t connected_components(const FuzzyAffinity& affinity);

struct TsneOptions {
  double perplexity = 10.0;  // clamped to (N - 1) / 3
  int iterations = 1000;
  int exaggeration_iterations = 250;
  double exaggeration = 12.0;
  int momentum_switch_iteration = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  double learning_rate = 200.0;
  std::uint64_t seed = 42;
};

struct TsneTrace {
  std::vector<double> kl;          // KL(P || Q) after every iteration
  std::vector<double> perplexity;  // achieved per point
  Matrix conditional_p;            // row-normalised P before symmetrisation
  double used_perplexity = 0.0;
};

/// Exact t-SNE to two dimensions. N >= 4.
Layout tsne_2d(const Matrix& points, const TsneOptions& options = {}, Warnings* warnings = nullptr,
               TsneTrace* trace = nullptr);

/// Default perplexity rule min(10, (N - 1) / 3).
double default_perplexity(std::size_t n);

/// Trustworthiness of `low` with respect to `high` for k neighbours, in [0, 1].
double trustworthiness(const Matrix& high, const Matrix& low, std::size_t k);

}  // namespace semshort

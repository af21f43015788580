#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "semshort/random.hpp"
#include "semshort/reduce.hpp"

namespace semshort {

namespace {

constexpr double kGradientClip = 4.0;
constexpr int kCurveSamples = 300;

double clip(double v) { return std::clamp(v, -kGradientClip, kGradientClip); }

double curve_sse(double a, double b, const std::vector<double>& xs, const std::vector<double>& ys) {
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = 1.0 / (1.0 + a * std::pow(xs[i], 2.0 * b)) - ys[i];
    s += r * r;
  }
  return s;
}

Matrix spectral_init(const FuzzyAffinity& affinity, std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(affinity.size());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd inv_sqrt_deg(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double deg = 0.0;
    for (const auto& e : affinity.rows[static_cast<std::size_t>(i)]) deg += e.weight;
    inv_sqrt_deg(i) = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (const auto& e : affinity.rows[static_cast<std::size_t>(i)]) {
      const auto j = static_cast<Eigen::Index>(e.col);
      lap(i, j) -= inv_sqrt_deg(i) * e.weight * inv_sqrt_deg(j);
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::numerical, "spectral initialisation: eigendecomposition failed", "reduce");
  }
  // Eigenvalues come back ascending; skip the trivial one.
  Matrix coords(affinity.size(), dim);
  for (std::size_t c = 0; c < dim; ++c) {
    Eigen::VectorXd v = solver.eigenvectors().col(static_cast<Eigen::Index>(c + 1));
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;  // fix the sign so the init is reproducible
    for (std::size_t r = 0; r < affinity.size(); ++r) coords(r, c) = v(static_cast<Eigen::Index>(r));
  }
  return coords;
}

// Scale to max |x| = 10, add tiny Gaussian noise, then map every column onto [0, 10].
void finish_spectral(Matrix& coords, Rng& rng) {
  double max_abs = 0.0;
  for (double v : coords.data()) max_abs = std::max(max_abs, std::abs(v));
  const double expansion = max_abs > 0.0 ? 10.0 / max_abs : 1.0;
  for (std::size_t r = 0; r < coords.rows(); ++r)
    for (std::size_t c = 0; c < coords.cols(); ++c) coords(r, c) = coords(r, c) * expansion + 1e-4 * rng.normal();
  for (std::size_t c = 0; c < coords.cols(); ++c) {
    double lo = coords(0, c), hi = coords(0, c);
    for (std::size_t r = 1; r < coords.rows(); ++r) {
      lo = std::min(lo, coords(r, c));
      hi = std::max(hi, coords(r, c));
    }
    const double span = hi - lo;
    for (std::size_t r = 0; r < coords.rows(); ++r) coords(r, c) = span > 0.0 ? 10.0 * (coords(r, c) - lo) / span : 5.0;
  }
}

}  // namespace

CurveParams fit_curve(double min_dist, double spread) {
  if (!(spread > 0.0) || min_dist < 0.0 || min_dist >= spread * 10.0) {
    throw Error(ErrorCode::invalid_config, "min_dist must satisfy 0 <= min_dist < 10 * spread", "config.min_dist");
  }
  std::vector<double> xs(kCurveSamples), ys(kCurveSamples);
  for (int i = 0; i < kCurveSamples; ++i) {
    xs[i] = 3.0 * spread * i / (kCurveSamples - 1);
    ys[i] = xs[i] < min_dist ? 1.0 : std::exp(-(xs[i] - min_dist) / spread);
  }

  double a = 1.0, b = 1.0, lambda = 1e-3;
  double sse = curve_sse(a, b, xs, ys);
  for (int iter = 0; iter < 500; ++iter) {
    // Normal equations of the 2-parameter problem.
    double jaa = 0, jab = 0, jbb = 0, ga = 0, gb = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double x = xs[i];
      const double u = x > 0.0 ? std::pow(x, 2.0 * b) : 0.0;
      const double denom = 1.0 + a * u;
      const double f = 1.0 / denom;
      const double r = f - ys[i];
      const double da = -u / (denom * denom);
      const double db = x > 0.0 ? -a * u * 2.0 * std::log(x) / (denom * denom) : 0.0;
      jaa += da * da;
      jab += da * db;
      jbb += db * db;
      ga += da * r;
      gb += db * r;
    }
    bool improved = false;
    for (int attempt = 0; attempt < 30 && !improved; ++attempt) {
      const double m00 = jaa * (1.0 + lambda), m11 = jbb * (1.0 + lambda), m01 = jab;
      const double det = m00 * m11 - m01 * m01;
      if (std::abs(det) < 1e-300) {
        lambda *= 10.0;
        continue;
      }
      const double step_a = -(m11 * ga - m01 * gb) / det;
      const double step_b = -(-m01 * ga + m00 * gb) / det;
      const double na = a + step_a, nb = b + step_b;
      const double candidate = (na > 0.0 && nb > 0.0) ? curve_sse(na, nb, xs, ys) : INFINITY;
      if (candidate < sse) {
        const double gain = sse - candidate;
        a = na;
        b = nb;
        sse = candidate;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        if (gain < 1e-15 * std::max(1.0, sse)) iter = 1 << 20;
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) break;
  }
  return {a, b, std::sqrt(sse / static_cast<double>(xs.size()))};
}

Layout optimize_layout(const FuzzyAffinity& affinity, const UmapOptions& options, Warnings* warnings) {
  const std::size_t n = affinity.size();
  const std::size_t dim = options.n_components;
  if (dim < 2) throw Error(ErrorCode::invalid_config, "n_components must be >= 2", "config.n_components");
  if (options.epochs < 1) throw Error(ErrorCode::invalid_config, "epochs must be >= 1", "config.epochs");
  if (n == 0) return {};

  const CurveParams curve = fit_curve(options.min_dist, options.spread);
  Rng rng(options.seed);

  Layout layout;
  layout.n_components = dim;
  layout.curve_a = curve.a;
  layout.curve_b = curve.b;
  layout.seed = options.seed;
  layout.epochs = options.epochs;

  const bool connected = connected_components(affinity) == 1;
  if (connected && n > dim + 1) {
    layout.coords = spectral_init(affinity, dim);
    finish_spectral(layout.coords, rng);
    layout.init = "spectral";
  } else {
    layout.coords = Matrix(n, dim);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < dim; ++c) layout.coords(r, c) = rng.uniform(-10.0, 10.0);
    layout.init = "random";
    if (warnings) {
      warnings->push_back(connected ? fmt::format("reduce: N={} too small for {}-d spectral init; using random init", n, dim)
                                    : "reduce: affinity graph is disconnected; using random init");
    }
  }

  // Directed edge list (both orientations of every undirected edge).
  struct Edge {
    std::size_t head, tail;
    double epochs_per_sample;
  };
  double max_w = 0.0;
  for (const auto& row : affinity.rows)
    for (const auto& e : row) max_w = std::max(max_w, e.weight);
  std::vector<Edge> edges;
  const double n_epochs = static_cast<double>(options.epochs);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& e : affinity.rows[i])
      if (e.weight >= max_w / n_epochs) edges.push_back({i, e.col, max_w / e.weight});

  std::vector<double> next_sample(edges.size()), neg_period(edges.size()), next_negative(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    next_sample[k] = edges[k].epochs_per_sample;
    neg_period[k] = edges[k].epochs_per_sample / options.negative_sample_rate;
    next_negative[k] = neg_period[k];
  }

  const double a = curve.a, b = curve.b, gamma = options.repulsion_strength;
  double alpha = options.learning_rate;
  Matrix& y = layout.coords;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const double now = static_cast<double>(epoch);
    for (std::size_t k = 0; k < edges.size(); ++k) {
      if (next_sample[k] > now) continue;
      auto current = y.row(edges[k].head);
      auto other = y.row(edges[k].tail);
      const double d2 = squared_distance(current, other);
      if (d2 > 0.0) {
        const double coeff = -2.0 * a * b * std::pow(d2, b - 1.0) / (a * std::pow(d2, b) + 1.0);
        for (std::size_t d = 0; d < dim; ++d) {
          const double g = clip(coeff * (current[d] - other[d]));
          current[d] += g * alpha;
          other[d] -= g * alpha;
        }
      }
      next_sample[k] += edges[k].epochs_per_sample;

      const auto n_neg = static_cast<long>((now - next_negative[k]) / neg_period[k]);
      for (long p = 0; p < n_neg; ++p) {
        const std::size_t t = static_cast<std::size_t>(rng.below(n));
        if (t == edges[k].head) continue;
        auto neg = y.row(t);
        const double nd2 = squared_distance(current, neg);
        if (!(nd2 > 0.0)) continue;
        const double coeff = 2.0 * gamma * b / ((0.001 + nd2) * (a * std::pow(nd2, b) + 1.0));
        for (std::size_t d = 0; d < dim; ++d) current[d] += clip(coeff * (current[d] - neg[d])) * alpha;
      }
      next_negative[k] += static_cast<double>(std::max(n_neg, 0L)) * neg_period[k];
    }
    alpha = options.learning_rate * (1.0 - (now + 1.0) / n_epochs);
    for (double v : y.data()) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::numerical, fmt::format("layout became non-finite at epoch {}", epoch), "reduce");
      }
    }
  }
  return layout;
}

}  // namespace semshort

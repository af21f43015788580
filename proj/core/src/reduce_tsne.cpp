#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "semshort/random.hpp"
#include "semshort/reduce.hpp"

namespace semshort {

namespace {

constexpr double kEntropyTolerance = 1e-5;
constexpr int kBetaSearchIterations = 200;

// Conditional Gaussian row for point i at precision beta; returns entropy (nats).
double gaussian_row(const Matrix& d2, std::size_t i, double beta, std::vector<double>& row) {
  const std::size_t n = d2.rows();
  double min_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j)
    if (j != i) min_d = std::min(min_d, d2(i, j));
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    row[j] = j == i ? 0.0 : std::exp(-beta * (d2(i, j) - min_d));
    sum += row[j];
  }
  double weighted = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    row[j] /= sum;
    weighted += row[j] * (d2(i, j) - min_d);
  }
  return std::log(sum) + beta * weighted;
}

double kl_divergence(const Matrix& p, const Matrix& y) {
  const std::size_t n = p.rows();
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) z += 1.0 / (1.0 + squared_distance(y.row(i), y.row(j)));
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || p(i, j) <= 0.0) continue;
      const double q = 1.0 / (1.0 + squared_distance(y.row(i), y.row(j))) / z;
      kl += p(i, j) * std::log(p(i, j) / std::max(q, 1e-300));
    }
  return kl;
}

}  // namespace

double default_perplexity(std::size_t n) {
  return std::min(10.0, (static_cast<double>(n) - 1.0) / 3.0);
}

Layout tsne_2d(const Matrix& points, const TsneOptions& options, Warnings* warnings, TsneTrace* trace) {
  const std::size_t n = points.rows();
  if (n < 4) throw Error(ErrorCode::invalid_input, fmt::format("t-SNE needs at least 4 points, got {}", n));
  const double perplexity = std::min(options.perplexity, (static_cast<double>(n) - 1.0) / 3.0);

  Matrix d2(n, n);
  double max_d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = squared_distance(points.row(i), points.row(j));
      d2(i, j) = d2(j, i) = v;
      max_d2 = std::max(max_d2, v);
    }

  Rng rng(options.seed);
  Layout layout;
  layout.n_components = 2;
  layout.seed = options.seed;
  layout.epochs = options.iterations;
  layout.init = "gaussian";
  layout.coords = Matrix(n, 2);
  for (double& v : layout.coords.values()) v = 1e-4 * rng.normal();

  if (max_d2 == 0.0) {
    if (warnings) warnings->push_back("tsne: all input points are identical; returning jittered layout");
    if (trace) trace->used_perplexity = perplexity;
    return layout;
  }

  // Per-point precision by bisection on the entropy.
  const double target = std::log(perplexity);
  Matrix cond(n, n);
  std::vector<double> row(n), achieved(n);
  for (std::size_t i = 0; i < n; ++i) {
    double beta = 1.0, lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
    double h = gaussian_row(d2, i, beta, row);
    for (int iter = 0; iter < kBetaSearchIterations && std::abs(h - target) >= kEntropyTolerance; ++iter) {
      if (h > target) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = std::isinf(lo) ? beta / 2.0 : 0.5 * (beta + lo);
      }
      h = gaussian_row(d2, i, beta, row);
    }
    achieved[i] = std::exp(h);
    for (std::size_t j = 0; j < n; ++j) cond(i, j) = row[j];
  }

  Matrix p(n, n);
  const double norm = 2.0 * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) p(i, j) = std::max((cond(i, j) + cond(j, i)) / norm, 1e-12);

  Matrix& y = layout.coords;
  Matrix update(n, 2), gains(n, 2, 1.0), grad(n, 2);
  std::vector<double> num(n * n);
  if (trace) trace->kl.reserve(static_cast<std::size_t>(options.iterations));

  for (int iter = 0; iter < options.iterations; ++iter) {
    const double exaggeration = iter < options.exaggeration_iterations ? options.exaggeration : 1.0;
    const double momentum = iter < options.momentum_switch_iteration ? options.initial_momentum : options.final_momentum;

    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double v = i == j ? 0.0 : 1.0 / (1.0 + squared_distance(y.row(i), y.row(j)));
        num[i * n + j] = v;
        z += v;
      }
    for (std::size_t i = 0; i < n; ++i) {
      double gx = 0.0, gy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double w = (exaggeration * p(i, j) - num[i * n + j] / z) * num[i * n + j];
        gx += w * (y(i, 0) - y(j, 0));
        gy += w * (y(i, 1) - y(j, 1));
      }
      grad(i, 0) = 4.0 * gx;
      grad(i, 1) = 4.0 * gy;
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t d = 0; d < 2; ++d) {
        const bool same_sign = (grad(i, d) > 0.0) == (update(i, d) > 0.0);
        gains(i, d) = std::max(same_sign ? gains(i, d) * 0.8 : gains(i, d) + 0.2, 0.01);
        update(i, d) = momentum * update(i, d) - options.learning_rate * gains(i, d) * grad(i, d);
        y(i, d) += update(i, d);
      }
    for (std::size_t d = 0; d < 2; ++d) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += y(i, d);
      mean /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) y(i, d) -= mean;
    }
    for (double v : y.data())
      if (!std::isfinite(v)) throw Error(ErrorCode::numerical, fmt::format("t-SNE diverged at iteration {}", iter), "reduce");
    if (trace) trace->kl.push_back(kl_divergence(p, y));
  }

  if (trace) {
    trace->perplexity = std::move(achieved);
    trace->conditional_p = std::move(cond);
    trace->used_perplexity = perplexity;
  }
  return layout;
}

}  // namespace semshort

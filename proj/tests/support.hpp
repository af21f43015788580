#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "semshort/corpus.hpp"
#include "semshort/matrix.hpp"
#include "semshort/random.hpp"

namespace testing {

inline std::string data_path(const std::string& name) { return std::string(SEMSHORT_TEST_DATA_DIR) + "/" + name; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline semshort::ItemCorpus load_fixture(const std::string& name) {
  semshort::ParseOptions opts;
  opts.has_factor_column = true;
  return semshort::parse_items(read_text(data_path(name)), opts);
}

/// Five lexically disjoint groups of four paraphrases, interleaved so that
/// group g holds items g+1, g+6, g+11, g+16.
inline semshort::ItemCorpus synthetic_corpus() {
  static const char* groups[5][4] = {
      {"I sleep badly at night.", "At night I sleep badly.", "I sleep very badly at night.",
       "Most nights I sleep badly."},
      {"I worry about money matters.", "Money matters make me worry.", "I often worry about money matters.",
       "I worry a lot about money."},
      {"I enjoy parties with friends.", "Parties with friends I enjoy.", "I really enjoy parties with friends.",
       "I enjoy big parties with my friends."},
      {"I finish my work tasks on time.", "My work tasks I finish on time.",
       "I always finish my work tasks on time.", "I finish all work tasks on time."},
      {"I eat large meals every day.", "Every day I eat large meals.", "I eat very large meals every day.",
       "Each day I eat large meals."}};
  static const char* names[5] = {"sleep", "worry", "social", "work", "appetite"};
  semshort::ItemCorpus corpus;
  for (int rep = 0; rep < 4; ++rep) {
    for (int g = 0; g < 5; ++g) {
      semshort::Item item;
      item.id = static_cast<int>(corpus.items.size()) + 1;
      item.text = groups[g][rep];
      item.factor_label = names[g];
      corpus.items.push_back(item);
    }
  }
  return corpus;
}

/// Pair-counting form: 2(ad - bc) / ((a+b)(b+d) + (a+c)(c+d)).
inline double ari_pair_counting(const std::vector<int>& x, const std::vector<int>& y) {
  double a = 0, b = 0, c = 0, d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const bool sx = x[i] == x[j], sy = y[i] == y[j];
      if (sx && sy) ++a;
      else if (sx) ++b;
      else if (sy) ++c;
      else ++d;
    }
  }
  const double denom = (a + b) * (b + d) + (a + c) * (c + d);
  return denom == 0.0 ? 1.0 : 2.0 * (a * d - b * c) / denom;
}

struct NaiveMerge {
  std::set<std::size_t> members;
  double distance;
};

/// Agglomerative single linkage by repeated closest-pair search over clusters.
inline std::vector<NaiveMerge> naive_single_linkage(const semshort::Matrix& pts) {
  std::vector<std::set<std::size_t>> clusters;
  for (std::size_t i = 0; i < pts.rows(); ++i) clusters.push_back({i});
  std::vector<NaiveMerge> merges;
  while (clusters.size() > 1) {
    double best = INFINITY;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        for (auto p : clusters[i]) {
          for (auto q : clusters[j]) {
            const double d = semshort::euclidean_distance(pts.row(p), pts.row(q));
            if (d < best) {
              best = d;
              bi = i;
              bj = j;
            }
          }
        }
      }
    }
    clusters[bi].insert(clusters[bj].begin(), clusters[bj].end());
    clusters.erase(clusters.begin() + static_cast<long>(bj));
    merges.push_back({clusters[bi], best});
  }
  return merges;
}

/// Gaussian blobs with `per_blob` points around each centre.
inline semshort::Matrix blobs(const std::vector<std::vector<double>>& centres, std::size_t per_blob, double spread,
                              std::uint64_t seed, std::vector<int>* truth = nullptr) {
  semshort::Rng rng(seed);
  std::vector<std::vector<double>> rows;
  for (std::size_t c = 0; c < centres.size(); ++c) {
    for (std::size_t i = 0; i < per_blob; ++i) {
      std::vector<double> row;
      for (double v : centres[c]) row.push_back(v + spread * rng.normal());
      rows.push_back(row);
      if (truth) truth->push_back(static_cast<int>(c));
    }
  }
  return semshort::Matrix::from_rows(rows);
}

/// Groups of four near-identical points placed on a line.
inline semshort::Matrix grouped_line(const std::vector<double>& centres) {
  std::vector<std::vector<double>> rows;
  for (double c : centres)
    for (int i = 0; i < 4; ++i) rows.push_back({c + 0.01 * i, 0.02 * (i % 2)});
  return semshort::Matrix::from_rows(rows);
}

/// Two correlated standard-normal columns with exact sample correlation r.
inline semshort::Matrix bivariate(std::size_t n, double r, std::uint64_t seed) {
  semshort::Rng rng(seed);
  std::vector<double> x(n), z(n);
  for (auto& v : x) v = rng.normal();
  for (auto& v : z) v = rng.normal();
  const auto centre = [](std::vector<double>& v) {
    double m = 0;
    for (double e : v) m += e;
    m /= static_cast<double>(v.size());
    for (double& e : v) e -= m;
  };
  centre(x);
  centre(z);
  // Residualise z on x so the columns are exactly uncorrelated, then mix.
  double xz = 0, xx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    xz += x[i] * z[i];
    xx += x[i] * x[i];
  }
  for (std::size_t i = 0; i < n; ++i) z[i] -= xz / xx * x[i];
  double zz = 0;
  for (double e : z) zz += e * e;
  const double scale = std::sqrt(xx / zz);
  semshort::Matrix m(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, 0) = x[i];
    m(i, 1) = r * x[i] + std::sqrt(1.0 - r * r) * z[i] * scale;
  }
  return m;
}

/// Plain draws y = r x + sqrt(1 - r^2) z; the sample r varies around `r`.
inline semshort::Matrix bivariate_sampled(std::size_t n, double r, std::uint64_t seed) {
  semshort::Rng rng(seed);
  semshort::Matrix m(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.normal(), z = rng.normal();
    m(i, 0) = x;
    m(i, 1) = r * x + std::sqrt(1.0 - r * r) * z;
  }
  return m;
}

}  // namespace testing

#pragma once

#include <set>
#include <string>
#include <vector>

namespace testing {

struct StabilityCase {
  std::string scale;
  std::string setting;
  std::set<int> selected;
  double jaccard;
  int kept;
  int changed;
};

struct StabilityScale {
  std::string name;
  std::set<int> default_set;
  std::vector<StabilityCase> rows;
};

/// Reference perturbation rows: selected sets with their overlap figures.
/// The EPOCH-CN default set includes item 9 (10 items were selected).
inline std::vector<StabilityScale> reference_stability() {
  return {
      {"DASS",
       {1, 3, 4, 5, 6, 7, 8, 10, 11, 13, 20, 25},
       {
           {"DASS", "n_neighbors=2", {1, 3, 4, 5, 7, 8, 9, 10, 12, 13, 14, 19}, 0.500, 8, 4},
           {"DASS", "n_neighbors=10", {1, 2, 3, 4, 5, 6, 7, 8, 10, 13, 16, 17}, 0.600, 9, 3},
           {"DASS", "min_cluster_size=4", {1, 3, 4, 6, 7, 9, 10, 11, 15, 16, 17, 18}, 0.412, 7, 5},
           {"DASS", "min_cluster_size=6", {1, 3, 4, 5, 6, 7, 10, 11, 12, 15, 16, 19}, 0.500, 8, 4},
           {"DASS", "min_samples=2", {1, 3, 4, 6, 7, 8, 9, 10, 11, 15, 17, 21}, 0.500, 8, 4},
           {"DASS", "min_samples=3", {1, 4, 6, 9, 11, 15, 19, 21, 24, 27, 31, 38}, 0.200, 4, 8},
       }},
      {"IPIP",
       {1, 2, 3, 5, 12, 13, 14, 16, 24, 25, 26, 28, 31, 32, 33, 34, 42, 43, 45, 46},
       {
           {"IPIP", "n_neighbors=2", {1, 2, 3, 6, 7, 11, 12, 13, 14, 23, 24, 25, 32, 33, 34, 35, 42, 43, 44, 46},
            0.538, 14, 6},
           {"IPIP", "n_neighbors=10", {1, 2, 3, 11, 12, 13, 14, 15, 16, 17, 20, 21, 22, 31, 32, 33, 34, 41, 42, 43},
            0.481, 13, 7},
           {"IPIP", "min_cluster_size=4", {1, 2, 3, 4, 11, 14, 15, 16, 21, 23, 24, 25, 31, 32, 33, 34, 41, 42, 43, 44},
            0.481, 13, 7},
           {"IPIP", "min_cluster_size=6", {1, 2, 3, 4, 5, 6, 8, 9, 11, 14, 15, 16, 31, 32, 34, 36, 41, 42, 43, 44},
            0.379, 11, 9},
           {"IPIP", "min_samples=2", {3, 5, 6, 7, 11, 14, 15, 16, 24, 26, 27, 28, 31, 32, 34, 35, 42, 44, 45, 47},
            0.429, 12, 8},
           {"IPIP", "min_samples=3", {3, 5, 6, 7, 8, 9, 10, 11, 14, 15, 16, 21, 32, 34, 36, 37, 41, 42, 43, 44},
            0.250, 8, 12},
       }},
      {"EPOCH-CN",
       {1, 2, 4, 7, 9, 10, 12, 13, 18, 20},
       {
           {"EPOCH-CN", "n_neighbors=2", {2, 4, 5, 6, 7, 9, 10, 14, 15, 18}, 0.429, 6, 4},
           {"EPOCH-CN", "n_neighbors=10", {1, 2, 4, 5, 6, 7, 9, 10, 13, 18}, 0.667, 8, 2},
           {"EPOCH-CN", "min_cluster_size=4", {1, 2, 3, 4, 5, 6, 7, 9, 10, 13}, 0.538, 7, 3},
           {"EPOCH-CN", "min_samples=2", {4, 7, 10, 11, 13, 14, 15, 17, 19, 20}, 0.333, 5, 5},
           {"EPOCH-CN", "min_samples=3", {4, 5, 10, 11, 13, 14, 17, 18, 19, 20}, 0.333, 5, 5},
       }},
  };
}

}  // namespace testing

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semshort/cluster.hpp"
#include "semshort/corpus.hpp"
#include "semshort/error.hpp"

namespace semshort {

using TermVector = std::map<std::string, double, std::less<>>;

struct TermWeight {
  std::string term;
  double weight = 0.0;

  friend bool operator==(const TermWeight&, const TermWeight&) = default;
};

struct Representative {
  int item_id = 0;
  double probability = 0.0;
  bool low_confidence = false;

  friend bool operator==(const Representative&, const Representative&) = default;
};

struct Topic {
  int topic_id = 0;
  std::vector<int> member_ids;  // ascending item ids
  TermVector ctfidf;
  std::vector<TermWeight> keywords;
  std::vector<Representative> representatives;

  friend bool operator==(const Topic&, const Topic&) = default;
};

struct MergeEvent {
  int from = 0;
  int into = 0;
  double cosine = 0.0;

  friend bool operator==(const MergeEvent&, const MergeEvent&) = default;
};

struct TopicModel {
  std::vector<Topic> topics;  // by size desc, then lowest member id
  std::vector<int> outliers;
  std::vector<MergeEvent> merge_log;
  std::size_t top_n_words = 3;

  [[nodiscard]] std::vector<int> selected_ids() const;  // ascending

  friend bool operator==(const TopicModel&, const TopicModel&) = default;
};

/// Class-based TF-IDF over class documents (one token list per class):
/// W(t, c) = tf(t, c) * log(1 + A / f(t)), A the mean token count per
/// class and f(t) the total count of t. Empty classes yield empty vectors.
std::vector<TermVector> ctfidf(const std::vector<std::vector<std::string>>& class_tokens,
                               Warnings* warnings = nullptr);

/// Weights for every non-noise cluster label of `assignment`, in label order.
std::vector<TermVector> ctfidf(const ItemCorpus& corpus, const ClusterAssignment& assignment,
                               Warnings* warnings = nullptr);

/// The n highest-weight terms; equal weights in lexicographic order.
std::vector<TermWeight> top_keywords(const TermVector& weights, std::size_t n = 3);

double cosine_similarity(const TermVector& a, const TermVector& b);

/// Topics from clusters with c-TF-IDF and keywords filled in.
TopicModel build_topics(const ItemCorpus& corpus, const ClusterAssignment& assignment, std::size_t top_n_words = 3,
                        Warnings* warnings = nullptr);

struct MergeMode {
  /// Exact topic count; when unset merge while some pair reaches `threshold`.
  std::optional<std::size_t> target;
  double threshold = 0.9;

  static MergeMode automatic(double threshold = 0.9) { return {std::nullopt, threshold}; }
  static MergeMode to_count(std::size_t n) { return {n, 0.9}; }
};

/// Repeatedly merges the most similar pair (highest cosine, then earliest
/// pair in topic order), recomputing c-TF-IDF for all topics after each
/// merge. The larger (earlier) topic absorbs the other.
TopicModel merge_topics(TopicModel model, const ItemCorpus& corpus, const MergeMode& mode,
                        Warnings* warnings = nullptr);

struct SelectionOptions {
  std::size_t k_per_topic = 4;
  double min_prob = 0.85;
  std::optional<std::size_t> budget;
};

/// Largest-remainder apportionment of `budget` over topic sizes, at least
/// one per topic and never more than the topic holds. Remainder ties go to
/// the earlier topic.
std::vector<std::size_t> allocate_budget(const std::vector<std::size_t>& sizes, std::size_t budget);

/// Top items per topic by membership probability (ties to the lower id).
/// Items under min_prob are kept and flagged low-confidence.
TopicModel select_representatives(TopicModel model, const ClusterAssignment& assignment,
                                   const SelectionOptions& options, Warnings* warnings = nullptr);

}  // namespace semshort

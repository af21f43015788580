#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semshort/corpus.hpp"
#include "semshort/matrix.hpp"
#include "semshort/topics.hpp"

namespace semshort {

/// Cluster (rows) x class (columns) counts with their margins.
struct ContingencyTable {
  std::vector<std::vector<long>> counts;
  std::vector<long> row_sums;
  std::vector<long> col_sums;
  long total = 0;
};

/// Any integer labels; -1 entries must be filtered beforehand.
ContingencyTable contingency(const std::vector<int>& labels_a, const std::vector<int>& labels_b);

struct AriResult {
  double value = 0.0;
  std::size_t excluded = 0;  // items dropped because either side was -1
  std::size_t compared = 0;
};

/// Adjusted Rand index from the contingency table. Items labelled -1 in
/// either partition are excluded. When the chance-corrected denominator is
/// zero (both partitions trivial) the result is 1.0.
AriResult adjusted_rand_index(const std::vector<int>& labels_a, const std::vector<int>& labels_b);

/// String labels (factor names) mapped to integers in sorted order.
std::vector<int> encode_labels(const std::vector<std::string>& labels);

struct DominantFactor {
  int topic_id = 0;
  std::string factor;
  double proportion = 0.0;
  std::size_t size = 0;
  bool tie = false;
};

/// Majority theoretical factor per topic; ties go to the lexicographically first factor and are flagged.
std::vector<DominantFactor> dominant_factor_map(const TopicModel& model, const ItemCorpus& corpus);

/// |a ∩ b| / |a ∪ b|. Throws when both sets are empty.
double jaccard(const std::set<int>& a, const std::set<int>& b);

struct SelectionOverlap {
  double jaccard = 0.0;
  std::size_t kept = 0;     // reference items still selected
  std::size_t changed = 0;  // reference items replaced
};

SelectionOverlap selection_overlap(const std::set<int>& reference, const std::set<int>& other);

/// Pearson correlations between the columns of `scores` (respondents x variables).
Matrix pearson_matrix(const Matrix& scores, const std::vector<std::string>& names = {});

double pearson(std::span<const double> x, std::span<const double> y);

struct FrobeniusResult {
  double similarity = 0.0;  // 1 - ||A-B|| / (||A|| + ||B||)
  double distance = 0.0;    // ||A-B||_F
};

FrobeniusResult frobenius_similarity(const Matrix& full, const Matrix& short_form);

/// r(full_i, short_j) for every pair of subscales; rows are respondents on both sides.
Matrix cross_form_correlations(const Matrix& full_scores, const Matrix& short_scores);

/// k/(k-1) * (1 - sum item variances / total variance), n-1 denominators.
double cronbach_alpha(const Matrix& item_scores);

/// Corrected item-total correlation: each column against the sum of the others.
std::vector<double> citc(const Matrix& item_scores);

/// Respondents x items with aligned 1-based item ids.
struct ResponseTable {
  Matrix values;
  std::vector<int> item_ids;
  std::size_t dropped_rows = 0;

  [[nodiscard]] std::vector<double> column(int item_id) const;
};

/// CSV with a header of item ids ("Q1" or "1"). Rows with any empty or
/// non-numeric ("NA") cell are dropped and counted.
ResponseTable parse_responses(std::string_view csv);
ResponseTable load_responses(const std::string& path);

/// Plain sums of the listed items per respondent.
std::vector<double> sum_scores(const ResponseTable& responses, const std::vector<int>& item_ids);

struct SubscaleQuality {
  std::string name;
  std::vector<int> item_ids;
  double alpha = 0.0;
  std::vector<double> citc;
};

struct EvaluationReport {
  std::optional<AriResult> ari;
  std::vector<DominantFactor> dominant_map;
  std::vector<std::string> factors;  // subscale order for the matrices below
  std::optional<Matrix> full_correlations;
  std::optional<Matrix> short_correlations;
  std::optional<FrobeniusResult> frobenius;
  std::optional<Matrix> cross_form;
  std::optional<double> alpha_total;
  std::vector<SubscaleQuality> subscales;
  std::size_t dropped_response_rows = 0;
  std::vector<std::string> notes;
};

/// Factor-label metrics (ARI, dominant factors) when labels are present and
/// response-based fidelity/reliability when `responses` is given. Short-form
/// subscales group selected items by their topic's dominant factor.
EvaluationReport evaluate(const ItemCorpus& corpus, const ClusterAssignment& assignment, const TopicModel& model,
                          const ResponseTable* responses);

}  // namespace semshort

#include "semshort/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

namespace semshort {

namespace {

double choose2(long x) { return static_cast<double>(x) * static_cast<double>(x - 1) / 2.0; }

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

std::vector<double> column_of(const Matrix& m, std::size_t c) {
  std::vector<double> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = m(r, c);
  return out;
}

Matrix columns_to_matrix(const std::vector<std::vector<double>>& cols) {
  if (cols.empty()) return {};
  Matrix m(cols.front().size(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t r = 0; r < cols[c].size(); ++r) m(r, c) = cols[c][r];
  return m;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

ContingencyTable contingency(const std::vector<int>& labels_a, const std::vector<int>& labels_b) {
  if (labels_a.size() != labels_b.size()) throw Error(ErrorCode::invalid_input, "label vectors differ in length");
  std::map<int, std::size_t> rows, cols;
  for (int a : labels_a) rows.emplace(a, 0);
  for (int b : labels_b) cols.emplace(b, 0);
  std::size_t k = 0;
  for (auto& [label, idx] : rows) idx = k++;
  k = 0;
  for (auto& [label, idx] : cols) idx = k++;
  ContingencyTable t;
  t.counts.assign(rows.size(), std::vector<long>(cols.size(), 0));
  t.row_sums.assign(rows.size(), 0);
  t.col_sums.assign(cols.size(), 0);
  for (std::size_t i = 0; i < labels_a.size(); ++i) {
    const auto r = rows[labels_a[i]], c = cols[labels_b[i]];
    ++t.counts[r][c];
    ++t.row_sums[r];
    ++t.col_sums[c];
    ++t.total;
  }
  return t;
}

AriResult adjusted_rand_index(const std::vector<int>& labels_a, const std::vector<int>& labels_b) {
  if (labels_a.size() != labels_b.size()) throw Error(ErrorCode::invalid_input, "label vectors differ in length");
  std::vector<int> a, b;
  AriResult result;
  for (std::size_t i = 0; i < labels_a.size(); ++i) {
    if (labels_a[i] < 0 || labels_b[i] < 0) {
      ++result.excluded;
      continue;
    }
    a.push_back(labels_a[i]);
    b.push_back(labels_b[i]);
  }
  result.compared = a.size();
  if (a.size() < 2) throw Error(ErrorCode::invalid_input, "ARI needs at least two labelled items");

  const auto t = contingency(a, b);
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& row : t.counts)
    for (long v : row) index += choose2(v);
  for (long v : t.row_sums) sum_a += choose2(v);
  for (long v : t.col_sums) sum_b += choose2(v);
  const double expected = sum_a * sum_b / choose2(t.total);
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  result.value = denom == 0.0 ? 1.0 : (index - expected) / denom;
  return result;
}

std::vector<int> encode_labels(const std::vector<std::string>& labels) {
  std::set<std::string> distinct(labels.begin(), labels.end());
  std::map<std::string, int> code;
  int k = 0;
  for (const auto& s : distinct) code[s] = k++;
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& s : labels) out.push_back(code[s]);
  return out;
}

std::vector<DominantFactor> dominant_factor_map(const TopicModel& model, const ItemCorpus& corpus) {
  if (!corpus.has_factor_labels()) throw Error(ErrorCode::invalid_input, "dominant factor map needs factor labels");
  std::vector<DominantFactor> out;
  for (const auto& topic : model.topics) {
    std::map<std::string, std::size_t> counts;
    for (int id : topic.member_ids) ++counts[*corpus.items.at(static_cast<std::size_t>(id - 1)).factor_label];
    DominantFactor row{topic.topic_id, {}, 0.0, topic.member_ids.size(), false};
    std::size_t best = 0;
    for (const auto& [factor, n] : counts) {
      if (n > best) {
        best = n;
        row.factor = factor;
        row.tie = false;
      } else if (n == best) {
        row.tie = true;
      }
    }
    row.proportion = static_cast<double>(best) / static_cast<double>(row.size);
    out.push_back(row);
  }
  return out;
}

double jaccard(const std::set<int>& a, const std::set<int>& b) {
  if (a.empty() && b.empty()) throw Error(ErrorCode::invalid_input, "Jaccard index undefined for two empty sets");
  std::size_t inter = 0;
  for (int x : a) inter += b.count(x);
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

SelectionOverlap selection_overlap(const std::set<int>& reference, const std::set<int>& other) {
  SelectionOverlap o;
  o.jaccard = jaccard(reference, other);
  o.kept = static_cast<std::size_t>(
      std::count_if(reference.begin(), reference.end(), [&](int id) { return other.contains(id); }));
  o.changed = reference.size() - o.kept;
  return o;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::invalid_input, "pearson: length mismatch");
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::invalid_input, "pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

Matrix pearson_matrix(const Matrix& scores, const std::vector<std::string>& names) {
  if (scores.rows() < 3) throw Error(ErrorCode::invalid_input, "correlations need at least 3 respondents");
  const std::size_t k = scores.cols();
  std::vector<std::vector<double>> cols(k);
  for (std::size_t c = 0; c < k; ++c) {
    cols[c] = column_of(scores, c);
    if (sample_variance(cols[c]) == 0.0) {
      const std::string name = c < names.size() ? names[c] : fmt::format("column {}", c + 1);
      throw Error(ErrorCode::invalid_input, "zero variance in variable " + name);
    }
  }
  Matrix r(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    r(i, i) = 1.0;
    for (std::size_t j = i + 1; j < k; ++j) r(i, j) = r(j, i) = pearson(cols[i], cols[j]);
  }
  return r;
}

FrobeniusResult frobenius_similarity(const Matrix& full, const Matrix& short_form) {
  if (full.rows() != short_form.rows() || full.cols() != short_form.cols()) {
    throw Error(ErrorCode::invalid_input, "frobenius_similarity: shape mismatch");
  }
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < full.data().size(); ++i) {
    const double a = full.data()[i], b = short_form.data()[i];
    diff += (a - b) * (a - b);
    na += a * a;
    nb += b * b;
  }
  FrobeniusResult r;
  r.distance = std::sqrt(diff);
  const double scale = std::sqrt(na) + std::sqrt(nb);
  r.similarity = scale == 0.0 ? 1.0 : 1.0 - r.distance / scale;
  return r;
}

Matrix cross_form_correlations(const Matrix& full_scores, const Matrix& short_scores) {
  if (full_scores.rows() != short_scores.rows()) {
    throw Error(ErrorCode::invalid_input, "respondent misalignment between full and short scores");
  }
  if (full_scores.rows() < 3) throw Error(ErrorCode::invalid_input, "correlations need at least 3 respondents");
  Matrix r(full_scores.cols(), short_scores.cols());
  for (std::size_t i = 0; i < full_scores.cols(); ++i) {
    const auto x = column_of(full_scores, i);
    for (std::size_t j = 0; j < short_scores.cols(); ++j) r(i, j) = pearson(x, column_of(short_scores, j));
  }
  return r;
}

double cronbach_alpha(const Matrix& item_scores) {
  const std::size_t k = item_scores.cols();
  if (k < 2) throw Error(ErrorCode::invalid_input, "Cronbach's alpha needs at least 2 items");
  if (item_scores.rows() < 3) throw Error(ErrorCode::invalid_input, "Cronbach's alpha needs at least 3 respondents");
  double item_var = 0.0;
  for (std::size_t c = 0; c < k; ++c) item_var += sample_variance(column_of(item_scores, c));
  std::vector<double> total(item_scores.rows(), 0.0);
  for (std::size_t r = 0; r < item_scores.rows(); ++r)
    for (std::size_t c = 0; c < k; ++c) total[r] += item_scores(r, c);
  const double total_var = sample_variance(total);
  if (total_var == 0.0) throw Error(ErrorCode::invalid_input, "Cronbach's alpha: zero total variance");
  const double kk = static_cast<double>(k);
  return kk / (kk - 1.0) * (1.0 - item_var / total_var);
}

std::vector<double> citc(const Matrix& item_scores) {
  const std::size_t k = item_scores.cols();
  if (k < 2) throw Error(ErrorCode::invalid_input, "CITC needs a subscale of at least 2 items");
  std::vector<double> out(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double> item = column_of(item_scores, c), rest(item_scores.rows(), 0.0);
    for (std::size_t r = 0; r < item_scores.rows(); ++r)
      for (std::size_t o = 0; o < k; ++o)
        if (o != c) rest[r] += item_scores(r, o);
    out[c] = pearson(item, rest);
  }
  return out;
}

std::vector<double> ResponseTable::column(int item_id) const {
  const auto it = std::find(item_ids.begin(), item_ids.end(), item_id);
  if (it == item_ids.end()) {
    throw Error(ErrorCode::invalid_input, fmt::format("responses have no column for item {}", item_id));
  }
  return column_of(values, static_cast<std::size_t>(it - item_ids.begin()));
}

ResponseTable parse_responses(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  ResponseTable table;
  bool header = true;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_commas(line);
    if (header) {
      for (auto cell : cells) {
        auto s = cell;
        if (!s.empty() && (s.front() == 'Q' || s.front() == 'q')) s.remove_prefix(1);
        int id = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), id);
        if (ec != std::errc{} || ptr != s.data() + s.size() || id < 1) {
          throw Error(ErrorCode::invalid_input, fmt::format("response header: invalid item id '{}'", cell));
        }
        table.item_ids.push_back(id);
      }
      header = false;
      continue;
    }
    if (cells.size() != table.item_ids.size()) {
      ++table.dropped_rows;
      continue;
    }
    std::vector<double> row;
    bool complete = true;
    for (auto cell : cells) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        complete = false;
        break;
      }
      row.push_back(v);
    }
    if (!complete) {
      ++table.dropped_rows;
      continue;
    }
    rows.push_back(std::move(row));
  }
  if (table.item_ids.empty()) throw Error(ErrorCode::invalid_input, "response file has no header");
  table.values = rows.empty() ? Matrix(0, table.item_ids.size()) : Matrix::from_rows(rows);
  return table;
}

ResponseTable load_responses(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open response file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_responses(buffer.str());
}

std::vector<double> sum_scores(const ResponseTable& responses, const std::vector<int>& item_ids) {
  std::vector<double> total(responses.values.rows(), 0.0);
  for (int id : item_ids) {
    const auto col = responses.column(id);
    for (std::size_t r = 0; r < total.size(); ++r) total[r] += col[r];
  }
  return total;
}

EvaluationReport evaluate(const ItemCorpus& corpus, const ClusterAssignment& assignment, const TopicModel& model,
                          const ResponseTable* responses) {
  (void)assignment;
  EvaluationReport report;
  std::vector<int> topic_of(corpus.size(), -1);
  for (const auto& topic : model.topics)
    for (int id : topic.member_ids) topic_of[static_cast<std::size_t>(id - 1)] = topic.topic_id;

  const bool labelled = corpus.has_factor_labels();
  if (labelled && !model.topics.empty()) {
    std::vector<std::string> factors;
    for (const auto& item : corpus.items) factors.push_back(*item.factor_label);
    if (corpus.size() - model.outliers.size() >= 2) report.ari = adjusted_rand_index(topic_of, encode_labels(factors));
    report.dominant_map = dominant_factor_map(model, corpus);
  }
  if (!responses || model.topics.empty()) return report;
  report.dropped_response_rows = responses->dropped_rows;

  // Subscale name -> item ids on each form.
  std::map<std::string, std::vector<int>> full_form, short_form;
  if (labelled) {
    for (const auto& item : corpus.items) full_form[*item.factor_label].push_back(item.id);
    for (const auto& row : report.dominant_map)
      for (const auto& rep : model.topics[static_cast<std::size_t>(row.topic_id)].representatives)
        short_form[row.factor].push_back(rep.item_id);
  } else {
    for (const auto& topic : model.topics) {
      const auto name = fmt::format("topic {}", topic.topic_id);
      full_form[name] = topic.member_ids;
      for (const auto& rep : topic.representatives) short_form[name].push_back(rep.item_id);
    }
  }
  for (auto& [name, ids] : short_form) std::sort(ids.begin(), ids.end());
  for (const auto& [name, ids] : full_form) {
    if (short_form.contains(name)) {
      report.factors.push_back(name);
    } else {
      report.notes.push_back("subscale " + name + " has no selected items; left out of the fidelity matrices");
    }
  }

  std::vector<std::vector<double>> full_cols, short_cols;
  for (const auto& name : report.factors) {
    full_cols.push_back(sum_scores(*responses, full_form[name]));
    short_cols.push_back(sum_scores(*responses, short_form[name]));
  }
  const Matrix full_scores = columns_to_matrix(full_cols), short_scores = columns_to_matrix(short_cols);
  report.full_correlations = pearson_matrix(full_scores, report.factors);
  report.short_correlations = pearson_matrix(short_scores, report.factors);
  report.frobenius = frobenius_similarity(*report.full_correlations, *report.short_correlations);
  report.cross_form = cross_form_correlations(full_scores, short_scores);

  const auto selected = model.selected_ids();
  if (selected.size() >= 2) {
    std::vector<std::vector<double>> cols;
    for (int id : selected) cols.push_back(responses->column(id));
    report.alpha_total = cronbach_alpha(columns_to_matrix(cols));
  }
  for (const auto& name : report.factors) {
    const auto& ids = short_form[name];
    SubscaleQuality q{name, ids, 0.0, {}};
    if (ids.size() < 2) {
      report.notes.push_back("subscale " + name + " has a single selected item; alpha and CITC skipped");
      report.subscales.push_back(std::move(q));
      continue;
    }
    std::vector<std::vector<double>> cols;
    for (int id : ids) cols.push_back(responses->column(id));
    const Matrix items = columns_to_matrix(cols);
    q.alpha = cronbach_alpha(items);
    q.citc = citc(items);
    report.subscales.push_back(std::move(q));
  }
  return report;
}

}  // namespace semshort

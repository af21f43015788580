#include "semshort/report.hpp"

#include <fmt/format.h>

namespace semshort {

namespace {

using nlohmann::json;

std::string join_ids(const std::vector<int>& ids, const char* prefix = "Q") {
  std::string out;
  for (int id : ids) out += fmt::format("{}{}{}", out.empty() ? "" : ", ", prefix, id);
  return out.empty() ? "-" : out;
}

std::string md_cell(std::string_view s) {
  std::string out;
  for (char ch : s) {
    if (ch == '|') out += "\\|";
    else if (ch == '\n') out += ' ';
    else out += ch;
  }
  return out;
}

void md_matrix(std::string& out, const Matrix& m, const std::vector<std::string>& rows,
               const std::vector<std::string>& cols) {
  out += "| |";
  for (const auto& c : cols) out += " " + md_cell(c) + " |";
  out += "\n|---|";
  for (std::size_t j = 0; j < cols.size(); ++j) out += "---|";
  out += "\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out += "| " + md_cell(rows[i]) + " |";
    for (std::size_t j = 0; j < m.cols(); ++j) out += fmt::format(" {:.3f} |", m(i, j));
    out += "\n";
  }
}

}  // namespace

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    out.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return out;
}

json model_to_json(const TopicModel& model) {
  json topics = json::array();
  for (const auto& t : model.topics) {
    json keywords = json::array(), reps = json::array(), weights = json::object();
    for (const auto& k : t.keywords) keywords.push_back({{"term", k.term}, {"weight", k.weight}});
    for (const auto& r : t.representatives) {
      reps.push_back({{"item_id", r.item_id}, {"probability", r.probability}, {"low_confidence", r.low_confidence}});
    }
    for (const auto& [term, w] : t.ctfidf) weights[term] = w;
    topics.push_back({{"topic_id", t.topic_id},
                      {"member_ids", t.member_ids},
                      {"keywords", keywords},
                      {"representatives", reps},
                      {"ctfidf", weights}});
  }
  json merges = json::array();
  for (const auto& m : model.merge_log) merges.push_back({{"from", m.from}, {"into", m.into}, {"cosine", m.cosine}});
  return {{"topics", topics},
          {"outliers", model.outliers},
          {"merge_log", merges},
          {"top_n_words", model.top_n_words},
          {"selected_ids", model.selected_ids()}};
}

json evaluation_to_json(const EvaluationReport& r) {
  json out = json::object();
  if (r.ari) out["ari"] = {{"value", r.ari->value}, {"excluded", r.ari->excluded}, {"compared", r.ari->compared}};
  json dom = json::array();
  for (const auto& d : r.dominant_map) {
    dom.push_back({{"topic_id", d.topic_id},
                   {"factor", d.factor},
                   {"proportion", d.proportion},
                   {"size", d.size},
                   {"tie", d.tie}});
  }
  out["dominant_map"] = dom;
  out["factors"] = r.factors;
  if (r.full_correlations) out["full_correlations"] = matrix_to_json(*r.full_correlations);
  if (r.short_correlations) out["short_correlations"] = matrix_to_json(*r.short_correlations);
  if (r.frobenius) {
    out["frobenius"] = {{"similarity", r.frobenius->similarity}, {"distance", r.frobenius->distance}};
  }
  if (r.cross_form) out["cross_form"] = matrix_to_json(*r.cross_form);
  if (r.alpha_total) out["alpha_total"] = *r.alpha_total;
  json subs = json::array();
  for (const auto& s : r.subscales) {
    subs.push_back({{"name", s.name}, {"item_ids", s.item_ids}, {"alpha", s.alpha}, {"citc", s.citc}});
  }
  out["subscales"] = subs;
  out["dropped_response_rows"] = r.dropped_response_rows;
  out["notes"] = r.notes;
  return out;
}

json result_to_json(const RunResult& r, bool include_timings) {
  json items = json::array();
  for (const auto& item : r.corpus.items) {
    items.push_back({{"id", item.id},
                     {"text", item.text},
                     {"factor", item.factor_label ? json(*item.factor_label) : json(nullptr)},
                     {"tokens", item.tokens}});
  }
  json polarity = json::array();
  for (const auto& p : r.polarity) polarity.push_back({{"item_id", p.item_id}, {"marker", p.marker}});
  const auto layout = [](const Layout& l) {
    return json{{"coords", matrix_to_json(l.coords)},
                {"n_components", l.n_components},
                {"curve_a", l.curve_a},
                {"curve_b", l.curve_b},
                {"seed", l.seed},
                {"epochs", l.epochs},
                {"init", l.init}};
  };
  json out{{"version", version()},
           {"status", r.status},
           {"config", to_json(r.config)},
           {"corpus", {{"language", r.corpus.language},
                       {"prefix", r.corpus.prefix ? json(*r.corpus.prefix) : json(nullptr)},
                       {"items", items}}},
           {"provider_id", r.provider_id},
           {"cluster_layout", layout(r.cluster_layout)},
           {"layout2d", layout(r.layout2d)},
           {"assignment", {{"labels", r.assignment.labels},
                           {"probabilities", r.assignment.probabilities},
                           {"stabilities", r.assignment.stabilities}}},
           {"model", model_to_json(r.model)},
           {"scene", scene_to_json(r.scene)},
           {"evaluation", r.evaluation ? evaluation_to_json(*r.evaluation) : json(nullptr)},
           {"polarity", polarity},
           {"warnings", r.warnings}};
  if (include_timings) {
    json t = json::array();
    for (const auto& s : r.timings) t.push_back({{"stage", s.stage}, {"ms", s.milliseconds}});
    out["timings"] = t;
  }
  return out;
}

bool same_payload(const RunResult& a, const RunResult& b) {
  return result_to_json(a, false) == result_to_json(b, false);
}

std::string render_report_md(const RunResult& r) {
  std::string out = "# Scale simplification report\n\n";
  out += fmt::format("- Items: {}\n- Status: {}\n- Embedding provider: {}\n", r.corpus.size(), r.status,
                     r.provider_id);
  out += fmt::format("- Topics: {} ({})\n", r.model.topics.size(),
                     r.config.nr_topics ? fmt::format("target {}", *r.config.nr_topics) : std::string("auto"));
  out += fmt::format("- Selected items: {}\n- Outliers: {}\n\n", r.model.selected_ids().size(),
                     join_ids(r.model.outliers));

  if (r.status == kStatusUnassigned) {
    out += "All items were labelled noise under this configuration; no short form was produced.\n\n";
  } else {
    out += "## Topics\n\n| Topic | Size | Keywords | Representatives |\n|---|---|---|---|\n";
    for (const auto& t : r.model.topics) {
      std::string keywords, reps;
      for (const auto& k : t.keywords) keywords += (keywords.empty() ? "" : ", ") + k.term;
      for (const auto& rep : t.representatives) {
        reps += fmt::format("{}Q{} ({:.3f}{})", reps.empty() ? "" : ", ", rep.item_id, rep.probability,
                            rep.low_confidence ? ", low" : "");
      }
      out += fmt::format("| {} | {} | {} | {} |\n", t.topic_id, t.member_ids.size(), md_cell(keywords), reps);
    }
    out += "\n";
    if (!r.model.merge_log.empty()) {
      out += "## Merges\n\n| From | Into | Cosine |\n|---|---|---|\n";
      for (const auto& m : r.model.merge_log) out += fmt::format("| {} | {} | {:.3f} |\n", m.from, m.into, m.cosine);
      out += "\n";
    }
  }

  if (r.evaluation) {
    const auto& e = *r.evaluation;
    out += "## Evaluation\n\n";
    if (e.ari) {
      out += fmt::format("- ARI vs factors: {:.3f} ({} items compared, {} outliers excluded)\n", e.ari->value,
                         e.ari->compared, e.ari->excluded);
    }
    if (e.frobenius) {
      out += fmt::format("- Frobenius similarity: {:.3f} (distance {:.3f})\n", e.frobenius->similarity,
                         e.frobenius->distance);
    }
    if (e.alpha_total) out += fmt::format("- Cronbach's alpha (short form): {:.3f}\n", *e.alpha_total);
    if (e.dropped_response_rows) out += fmt::format("- Response rows dropped: {}\n", e.dropped_response_rows);
    out += "\n";
    if (!e.dominant_map.empty()) {
      out += "| Topic | Dominant factor | Proportion | Size |\n|---|---|---|---|\n";
      for (const auto& d : e.dominant_map) {
        out += fmt::format("| {} | {}{} | {:.3f} | {} |\n", d.topic_id, md_cell(d.factor), d.tie ? " (tie)" : "",
                           d.proportion, d.size);
      }
      out += "\n";
    }
    if (e.cross_form) {
      out += "### Full x short subscale correlations\n\n";
      md_matrix(out, *e.cross_form, e.factors, e.factors);
      out += "\n";
    }
    if (!e.subscales.empty()) {
      out += "### Subscales\n\n| Subscale | Items | Alpha | CITC |\n|---|---|---|---|\n";
      for (const auto& s : e.subscales) {
        std::string citc;
        for (double v : s.citc) citc += fmt::format("{}{:.3f}", citc.empty() ? "" : ", ", v);
        out += fmt::format("| {} | {} | {} | {} |\n", md_cell(s.name), join_ids(s.item_ids),
                           s.citc.empty() ? "-" : fmt::format("{:.3f}", s.alpha), citc.empty() ? "-" : citc);
      }
      out += "\n";
    }
    for (const auto& note : e.notes) out += "- " + note + "\n";
  }
  if (!r.warnings.empty()) {
    out += "## Warnings\n\n";
    for (const auto& w : r.warnings) out += "- " + w + "\n";
  }
  return out;
}

json stability_to_json(const StabilityTable& table) {
  json rows = json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"parameter", r.parameter},
                    {"value", r.value},
                    {"status", r.status},
                    {"selected", r.selected},
                    {"jaccard", r.jaccard ? json(*r.jaccard) : json(nullptr)},
                    {"kept", r.kept},
                    {"changed", r.changed},
                    {"error", r.error}});
  }
  return {{"rows", rows}};
}

std::string render_stability_md(const StabilityTable& table) {
  std::string out = "| Parameter | Value | Selected items | Jaccard | Kept | Changed |\n|---|---|---|---|---|---|\n";
  for (const auto& r : table.rows) {
    if (r.status != kStatusOk) {
      out += fmt::format("| {} | {} | {} | - | - | - |\n", r.parameter, r.value,
                         r.status == kStatusUnassigned ? "Unassigned" : "Error: " + md_cell(r.error));
      continue;
    }
    out += fmt::format("| {} | {} | {} | {} | {} | {} |\n", r.parameter, r.value, join_ids(r.selected, ""),
                       r.jaccard ? fmt::format("{:.3f}", *r.jaccard) : "-", r.kept, r.changed);
  }
  return out;
}

}  // namespace semshort

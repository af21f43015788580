#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "semshort/pipeline.hpp"

namespace semshort {

nlohmann::json matrix_to_json(const Matrix& m);
nlohmann::json model_to_json(const TopicModel& model);
nlohmann::json evaluation_to_json(const EvaluationReport& report);

/// Self-describing result document. Without timings, equal runs give equal JSON.
nlohmann::json result_to_json(const RunResult& result, bool include_timings = true);

/// The reproducible part of a run; timings excluded.
bool same_payload(const RunResult& a, const RunResult& b);

std::string render_report_md(const RunResult& result);

nlohmann::json stability_to_json(const StabilityTable& table);
std::string render_stability_md(const StabilityTable& table);

}  // namespace semshort

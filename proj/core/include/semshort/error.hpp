#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace semshort {

enum class ErrorCode {
  invalid_input,   // malformed corpus, embeddings or responses
  invalid_config,  // a PipelineConfig field is out of range
  provider,        // embedding provider failure
  numerical,       // non-finite state during optimisation
  io,
};

/// Single exception type for the library. `where` holds a field path
/// ("config.min_prob") for config errors or a stage tag ("embed") for
/// provider failures; it may be empty.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string where = {})
      : std::runtime_error(message), code_(code), where_(std::move(where)) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  [[nodiscard]] const std::string& where() const noexcept { return where_; }

 private:
  ErrorCode code_;
  std::string where_;
};

/// Non-fatal diagnostics collected along the pipeline.
using Warnings = std::vector<std::string>;

}  // namespace semshort

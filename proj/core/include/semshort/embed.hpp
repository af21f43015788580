#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "semshort/corpus.hpp"
#include "semshort/matrix.hpp"

namespace semshort {

/// One row per item. When `normalized` is set every row has unit L2 norm.
struct EmbeddingMatrix {
  Matrix vectors;
  std::string provider_id;
  bool normalized = false;

  [[nodiscard]] std::size_t size() const noexcept { return vectors.rows(); }
  [[nodiscard]] std::size_t dims() const noexcept { return vectors.cols(); }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;
};

/// Scales each row to unit length. Throws on a zero or non-finite row.
void normalize_rows(Matrix& m);

/// Checks row count, D >= 2, finiteness and (if flagged) unit norms.
void validate_embeddings(const EmbeddingMatrix& e, std::size_t expected_n);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Reads a CSV file (one numeric row per item) or JSON Lines
/// (`{"id":1,"vector":[...]}`, any order, ids 1..N). The format is chosen by
/// extension (.jsonl/.ndjson) or by a leading '{'.
EmbeddingMatrix load_embeddings(const std::string& path, std::size_t expected_n, bool normalize = true);

/// Same as load_embeddings, from an in-memory buffer.
EmbeddingMatrix parse_embeddings(std::string_view content, std::size_t expected_n, bool normalize = true,
                                 bool jsonl = false);

/// Writes CSV with 17 significant digits so load_embeddings round-trips.
std::string embeddings_to_csv(const Matrix& m);

struct HashEncoderOptions {
  std::size_t dims = 256;
  std::size_t ngram_min = 2;
  std::size_t ngram_max = 4;
  std::uint64_t seed = 42;
};

/// Deterministic offline provider: hashed character n-grams (code points)
/// with signed buckets, accumulated and L2-normalised.
EmbeddingMatrix hash_encode(const std::vector<std::string>& texts, const HashEncoderOptions& options = {});
EmbeddingMatrix hash_encode(const ItemCorpus& corpus, const HashEncoderOptions& options = {});

/// Settings for an OpenAI-style `/embeddings` endpoint.
struct EndpointConfig {
  std::string endpoint_url;   // e.g. http://localhost:8080/v1/embeddings
  std::string model_name;
  std::size_t batch_size = 32;
  std::size_t max_batch_size = 256;
  double timeout_s = 30.0;
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{200};
  /// Read from SEMSHORT_API_KEY when empty.
  std::string api_key;
  bool normalize = true;
};

inline constexpr const char* kApiKeyEnv = "SEMSHORT_API_KEY";

/// POSTs `{"model":..., "input":[...]}` per batch and expects
/// `{"data":[{"embedding":[...]}, ...]}`. Entries carrying an "index" field
/// are placed by index. Transient failures (connection errors, 408, 429,
/// 5xx) are retried with exponential backoff; 401/403 fail immediately.
/// All errors are ErrorCode::provider with stage "embed".
EmbeddingMatrix fetch_remote_embeddings(const std::vector<std::string>& texts, const EndpointConfig& config);

/// Number of requests fetch_remote_embeddings issues without retries.
std::size_t batch_count(std::size_t n_texts, std::size_t batch_size);

}  // namespace semshort

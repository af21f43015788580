#include "semshort/embed.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "semshort/random.hpp"

namespace semshort {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open embedding file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

double parse_cell(std::string_view cell, std::size_t line_no, std::size_t col) {
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) cell.remove_suffix(1);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) {
    throw Error(ErrorCode::invalid_input, fmt::format("non-numeric cell at line {}, column {}: '{}'",
                                                      line_no, col + 1, cell));
  }
  return value;
}

Matrix parse_csv_rows(std::string_view content) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= content.size()) {
    auto end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    auto line = content.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (end == content.size()) break;
      continue;
    }
    std::vector<double> row;
    std::size_t col = 0;
    std::size_t pos = 0;
    while (true) {
      auto comma = line.find(',', pos);
      auto cell = line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
      row.push_back(parse_cell(cell, line_no, col++));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::invalid_input,
                  fmt::format("inconsistent dimension at line {}: {} values, expected {}", line_no,
                              row.size(), rows.front().size()));
    }
    rows.push_back(std::move(row));
    if (end == content.size()) break;
  }
  return Matrix::from_rows(rows);
}

Matrix parse_jsonl_rows(std::string_view content) {
  std::vector<std::pair<long, std::vector<double>>> entries;
  std::size_t line_no = 0;
  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::invalid_input, fmt::format("line {}: invalid JSON: {}", line_no, e.what()));
    }
    if (!j.is_object() || !j.contains("vector") || !j["vector"].is_array()) {
      throw Error(ErrorCode::invalid_input, fmt::format("line {}: expected {{\"id\":..,\"vector\":[..]}}", line_no));
    }
    const long id = j.contains("id") && j["id"].is_number_integer() ? j["id"].get<long>()
                                                                   : static_cast<long>(entries.size() + 1);
    std::vector<double> v;
    for (std::size_t c = 0; c < j["vector"].size(); ++c) {
      const auto& cell = j["vector"][c];
      if (!cell.is_number()) {
        throw Error(ErrorCode::invalid_input,
                    fmt::format("non-numeric cell at line {}, column {}", line_no, c + 1));
      }
      v.push_back(cell.get<double>());
    }
    if (!entries.empty() && v.size() != entries.front().second.size()) {
      throw Error(ErrorCode::invalid_input, fmt::format("inconsistent dimension at line {}: {} values, expected {}",
                                                        line_no, v.size(), entries.front().second.size()));
    }
    entries.emplace_back(id, std::move(v));
  }
  std::vector<std::vector<double>> rows(entries.size());
  std::vector<bool> filled(entries.size(), false);
  for (auto& [id, v] : entries) {
    if (id < 1 || static_cast<std::size_t>(id) > entries.size() || filled[static_cast<std::size_t>(id - 1)]) {
      throw Error(ErrorCode::invalid_input, fmt::format("embedding id {} is duplicated or out of range", id));
    }
    filled[static_cast<std::size_t>(id - 1)] = true;
    rows[static_cast<std::size_t>(id - 1)] = std::move(v);
  }
  return Matrix::from_rows(rows);
}

// FNV-1a over bytes, then a seeded avalanche so buckets and signs are independent of std::hash.
std::uint64_t gram_hash(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(h ^ mix64(seed));
}

}  // namespace

void normalize_rows(Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    double norm = 0.0;
    for (double v : row) norm += v * v;
    norm = std::sqrt(norm);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw Error(ErrorCode::invalid_input, fmt::format("row {} has zero or non-finite norm", r + 1));
    }
    for (double& v : row) v /= norm;
  }
}

void validate_embeddings(const EmbeddingMatrix& e, std::size_t expected_n) {
  if (e.size() != expected_n) {
    throw Error(ErrorCode::invalid_input,
                fmt::format("row-count mismatch: {} embedding rows for {} items", e.size(), expected_n));
  }
  if (e.dims() < 2) throw Error(ErrorCode::invalid_input, "embedding dimension must be at least 2");
  for (std::size_t r = 0; r < e.size(); ++r) {
    double norm = 0.0;
    for (double v : e.vectors.row(r)) {
      if (!std::isfinite(v)) throw Error(ErrorCode::invalid_input, fmt::format("row {} is not finite", r + 1));
      norm += v * v;
    }
    if (e.normalized && std::abs(std::sqrt(norm) - 1.0) > 1e-6) {
      throw Error(ErrorCode::invalid_input, fmt::format("row {} is not unit length", r + 1));
    }
  }
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

EmbeddingMatrix parse_embeddings(std::string_view content, std::size_t expected_n, bool normalize, bool jsonl) {
  const auto first = content.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && content[first] == '{') jsonl = true;
  EmbeddingMatrix e;
  e.vectors = jsonl ? parse_jsonl_rows(content) : parse_csv_rows(content);
  e.provider_id = "file";
  if (e.vectors.rows() != expected_n) {
    throw Error(ErrorCode::invalid_input, fmt::format("row-count mismatch: {} embedding rows for {} items",
                                                      e.vectors.rows(), expected_n));
  }
  if (normalize) {
    normalize_rows(e.vectors);
    e.normalized = true;
  }
  validate_embeddings(e, expected_n);
  return e;
}

EmbeddingMatrix load_embeddings(const std::string& path, std::size_t expected_n, bool normalize) {
  const bool jsonl = path.ends_with(".jsonl") || path.ends_with(".ndjson");
  return parse_embeddings(read_file(path), expected_n, normalize, jsonl);
}

std::string embeddings_to_csv(const Matrix& m) {
  std::string out;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += fmt::format("{:.17g}", m(r, c));
    }
    out += '\n';
  }
  return out;
}

EmbeddingMatrix hash_encode(const std::vector<std::string>& texts, const HashEncoderOptions& options) {
  if (options.dims < 16) throw Error(ErrorCode::invalid_config, "hash encoder needs dims >= 16", "config.hash_dims");
  if (options.ngram_min < 1 || options.ngram_max < options.ngram_min) {
    throw Error(ErrorCode::invalid_config, "invalid n-gram range", "config.ngram_range");
  }
  EmbeddingMatrix e;
  e.vectors = Matrix(texts.size(), options.dims);
  e.provider_id = fmt::format("hash:{}:{}-{}:{}", options.dims, options.ngram_min, options.ngram_max, options.seed);
  for (std::size_t r = 0; r < texts.size(); ++r) {
    auto cps = decode_utf8(texts[r]);
    for (auto& cp : cps)
      if (cp < 0x80) cp = static_cast<char32_t>(std::tolower(static_cast<int>(cp)));
    std::vector<std::string> units;
    units.reserve(cps.size());
    for (char32_t cp : cps) units.push_back(encode_utf8(cp));

    auto row = e.vectors.row(r);
    auto add = [&](std::size_t begin, std::size_t n) {
      std::string gram;
      for (std::size_t k = begin; k < begin + n; ++k) gram += units[k];
      const std::uint64_t h = gram_hash(gram, options.seed + n);
      const double sign = (h >> 63) != 0 ? -1.0 : 1.0;
      row[static_cast<std::size_t>(h % options.dims)] += sign;
    };
    bool any = false;
    for (std::size_t n = options.ngram_min; n <= options.ngram_max; ++n) {
      for (std::size_t b = 0; b + n <= units.size(); ++b) {
        add(b, n);
        any = true;
      }
    }
    if (!any && !units.empty()) add(0, units.size());
    double norm = 0.0;
    for (double v : row) norm += v * v;
    if (norm == 0.0) {
      // Empty text, or every gram cancelled: fall back to a fixed unit vector.
      row[static_cast<std::size_t>(gram_hash(texts[r], options.seed) % options.dims)] = 1.0;
    }
  }
  normalize_rows(e.vectors);
  e.normalized = true;
  return e;
}

EmbeddingMatrix hash_encode(const ItemCorpus& corpus, const HashEncoderOptions& options) {
  return hash_encode(corpus.embedding_texts(), options);
}

std::size_t batch_count(std::size_t n_texts, std::size_t batch_size) {
  if (batch_size == 0) return 0;
  return (n_texts + batch_size - 1) / batch_size;
}

}  // namespace semshort

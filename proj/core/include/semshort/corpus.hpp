#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "semshort/error.hpp"

namespace semshort {

/// A questionnaire statement. `id` is the 1-based position in the scale.
struct Item {
  int id = 0;
  std::string text;
  std::optional<std::string> factor_label;
  std::vector<std::string> tokens;
  bool pretokenized = false;  // tokens supplied by the user; tokenize() only filters them

  friend bool operator==(const Item&, const Item&) = default;
};

struct ItemCorpus {
  std::vector<Item> items;
  std::string language = "en";
  std::optional<std::string> prefix;

  [[nodiscard]] std::size_t size() const noexcept { return items.size(); }
  [[nodiscard]] bool has_factor_labels() const;

  /// Text handed to the embedding provider: prefix + item text.
  [[nodiscard]] std::string embedding_text(std::size_t index) const;
  [[nodiscard]] std::vector<std::string> embedding_texts() const;

  friend bool operator==(const ItemCorpus&, const ItemCorpus&) = default;
};

/// Smallest corpus the clustering stage accepts.
inline constexpr std::size_t kMinCorpusSize = 4;

struct ParseOptions {
  std::optional<std::string> prefix;
  /// Force table parsing. Without it a table is detected from an
  /// `id,factor,text` (or tab-separated) header line.
  bool has_factor_column = false;
  /// "auto" picks "zh" when any Han character is present, else "en".
  std::string language = "auto";
};

/// Parses plain text (one item per line) or a CSV/TSV table with columns
/// id, factor, text. Ids may carry a "Q" prefix ("Q12"). Blank lines inside
/// the input are rejected with their line number; trailing blank lines are
/// ignored.
ItemCorpus parse_items(std::string_view raw, const ParseOptions& options = {});

/// CSV with header `id,factor,text`; parse_items() reads it back unchanged.
std::string serialize_items(const ItemCorpus& corpus);

using StopWords = std::set<std::string, std::less<>>;

/// One token per line, '#' starts a comment line.
StopWords parse_stopwords(std::string_view text);
StopWords load_stopwords(const std::string& path);
/// The lists shipped with the library ("en" and "zh"; anything else is empty).
const StopWords& builtin_stopwords(std::string_view language);

/// Fills item tokens: lowercase, split on non-alphanumerics, possessive
/// "'s" stripped, numeric tokens and stop words removed. Contiguous Han runs
/// become overlapping bigrams followed by single characters. Items left
/// without tokens are kept and reported through `warnings`.
ItemCorpus tokenize(ItemCorpus corpus, const StopWords& stopwords, Warnings* warnings = nullptr);

/// Tokenises with builtin_stopwords(corpus.language).
ItemCorpus tokenize(ItemCorpus corpus, Warnings* warnings = nullptr);

struct PolarityWarning {
  int item_id = 0;
  std::string marker;
  std::string message;

  friend bool operator==(const PolarityWarning&, const PolarityWarning&) = default;
};

inline const std::vector<std::string>& default_negation_markers() {
  static const std::vector<std::string> markers{"don't", "not", "never", "no"};
  return markers;
}

/// Flags items that look reverse-keyed. Markers match whole words,
/// case-insensitively; curly apostrophes are treated as straight ones.
std::vector<PolarityWarning> validate_polarity(
    const ItemCorpus& corpus,
    const std::vector<std::string>& markers = default_negation_markers());

/// Splits one UTF-8 string into code points. Invalid bytes map to U+FFFD.
std::vector<char32_t> decode_utf8(std::string_view s);
std::string encode_utf8(char32_t cp);
bool is_han(char32_t cp);

}  // namespace semshort

#include "semshort/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

namespace semshort {

namespace detail {
extern const std::string_view kStopwordsEn;
extern const std::string_view kStopwordsZh;
}  // namespace detail

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split_lines(std::string_view raw) {
  std::vector<std::string> lines;
  std::string current;
  for (char c : raw) {
    if (c == '\n') {
      if (!current.empty() && current.back() == '\r') current.pop_back();
      lines.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty() && current.back() == '\r') current.pop_back();
  if (!current.empty()) lines.push_back(std::move(current));
  // Strip a UTF-8 byte-order mark.
  if (!lines.empty() && lines.front().starts_with("\xEF\xBB\xBF")) lines.front().erase(0, 3);
  return lines;
}

// One delimited record; double quotes may wrap a field and "" escapes a quote.
std::vector<std::string> split_record(std::string_view line, char delim) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && trim(field).empty()) {
      field.clear();
      quoted = true;
    } else if (c == delim) {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

bool is_table_header(const std::vector<std::string>& fields) {
  if (fields.size() != 3) return false;
  return to_lower_ascii(trim(fields[0])) == "id" && to_lower_ascii(trim(fields[1])) == "factor" &&
         to_lower_ascii(trim(fields[2])) == "text";
}

int parse_id(std::string_view field, std::size_t line_no) {
  auto s = trim(field);
  if (!s.empty() && (s.front() == 'Q' || s.front() == 'q')) s.remove_prefix(1);
  int value = 0;
  bool ok = !s.empty();
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      ok = false;
      break;
    }
    value = value * 10 + (c - '0');
    if (value > 1'000'000) {
      ok = false;
      break;
    }
  }
  if (!ok || value < 1) {
    throw Error(ErrorCode::invalid_input,
                "line " + std::to_string(line_no) + ": invalid item id '" + std::string(field) + "'");
  }
  return value;
}

bool contains_han(std::string_view text) {
  for (char32_t cp : decode_utf8(text))
    if (is_han(cp)) return true;
  return false;
}

bool is_token_char(char32_t cp) {
  if (cp < 0x80) return std::isalnum(static_cast<int>(cp)) != 0;
  if (is_han(cp)) return false;
  // General punctuation, CJK symbols/punctuation, full-width ASCII punctuation.
  if (cp >= 0x2000 && cp <= 0x206F) return false;
  if (cp >= 0x3000 && cp <= 0x303F) return false;
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
  if (cp >= 0xFF1A && cp <= 0xFF20) return false;
  if (cp >= 0xFF3B && cp <= 0xFF40) return false;
  if (cp >= 0xFF5B && cp <= 0xFF65) return false;
  if (cp == 0x00A0 || (cp >= 0x00A1 && cp <= 0x00BF) || cp == 0x00D7 || cp == 0x00F7) return false;
  return true;
}

bool is_numeric(std::string_view token) {
  return !token.empty() && std::all_of(token.begin(), token.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c)) != 0;
  });
}

bool is_stop(const std::string& token, const StopWords& stopwords) {
  if (stopwords.contains(token)) return true;
  const auto cps = decode_utf8(token);
  if (cps.empty() || !is_han(cps.front())) return false;
  return std::all_of(cps.begin(), cps.end(),
                     [&](char32_t cp) { return stopwords.contains(encode_utf8(cp)); });
}

// Lowercase code points with curly apostrophes folded and possessive 's removed.
std::vector<char32_t> normalise_for_tokens(std::string_view text) {
  std::vector<char32_t> cps = decode_utf8(text);
  for (auto& cp : cps) {
    if (cp == U'’' || cp == U'‘') cp = U'\'';
    if (cp < 0x80) cp = static_cast<char32_t>(std::tolower(static_cast<int>(cp)));
  }
  std::vector<char32_t> out;
  out.reserve(cps.size());
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (cps[i] == U'\'' && i + 1 < cps.size() && cps[i + 1] == U's' &&
        (i + 2 == cps.size() || !is_token_char(cps[i + 2])) && i > 0 && is_token_char(cps[i - 1])) {
      ++i;  // skip the "'s"
      continue;
    }
    out.push_back(cps[i]);
  }
  return out;
}

std::vector<std::string> raw_tokens(std::string_view text) {
  const auto cps = normalise_for_tokens(text);
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < cps.size()) {
    if (is_han(cps[i])) {
      std::size_t j = i;
      while (j < cps.size() && is_han(cps[j])) ++j;
      for (std::size_t k = i; k + 1 < j; ++k) tokens.push_back(encode_utf8(cps[k]) + encode_utf8(cps[k + 1]));
      for (std::size_t k = i; k < j; ++k) tokens.push_back(encode_utf8(cps[k]));
      i = j;
    } else if (is_token_char(cps[i])) {
      std::string word;
      while (i < cps.size() && is_token_char(cps[i])) word += encode_utf8(cps[i++]);
      tokens.push_back(std::move(word));
    } else {
      ++i;
    }
  }
  return tokens;
}

std::vector<std::string> words_for_polarity(std::string_view text) {
  auto cps = decode_utf8(text);
  std::vector<std::string> words;
  std::string word;
  for (char32_t cp : cps) {
    if (cp == U'’' || cp == U'‘') cp = U'\'';
    if (cp == U'\'' || is_token_char(cp)) {
      word += cp < 0x80 ? std::string(1, static_cast<char>(std::tolower(static_cast<int>(cp))))
                        : encode_utf8(cp);
    } else if (!word.empty()) {
      words.push_back(std::move(word));
      word.clear();
    }
  }
  if (!word.empty()) words.push_back(std::move(word));
  return words;
}

}  // namespace

bool ItemCorpus::has_factor_labels() const {
  return !items.empty() &&
         std::all_of(items.begin(), items.end(), [](const Item& it) { return it.factor_label.has_value(); });
}

std::string ItemCorpus::embedding_text(std::size_t index) const {
  const auto& text = items.at(index).text;
  if (!prefix || prefix->empty()) return text;
  return *prefix + text;
}

std::vector<std::string> ItemCorpus::embedding_texts() const {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) out.push_back(embedding_text(i));
  return out;
}

ItemCorpus parse_items(std::string_view raw, const ParseOptions& options) {
  auto lines = split_lines(raw);
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw Error(ErrorCode::invalid_input, "empty input: no items found");

  ItemCorpus corpus;
  corpus.prefix = options.prefix;

  const char delim = lines.front().find('\t') != std::string::npos ? '\t' : ',';
  const bool header = is_table_header(split_record(lines.front(), delim));
  const bool table = header || options.has_factor_column;

  if (!table) {
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const auto text = trim(lines[i]);
      if (text.empty()) {
        throw Error(ErrorCode::invalid_input, "line " + std::to_string(i + 1) + ": blank item line");
      }
      corpus.items.push_back(Item{static_cast<int>(corpus.items.size() + 1), std::string(text), {}, {}});
    }
  } else {
    std::map<int, std::size_t> seen;  // id -> line
    for (std::size_t i = header ? 1 : 0; i < lines.size(); ++i) {
      const std::size_t line_no = i + 1;
      if (trim(lines[i]).empty()) {
        throw Error(ErrorCode::invalid_input, "line " + std::to_string(line_no) + ": blank item line");
      }
      auto fields = split_record(lines[i], delim);
      if (fields.size() < 3) {
        throw Error(ErrorCode::invalid_input,
                    "line " + std::to_string(line_no) + ": expected columns id, factor, text");
      }
      // Unquoted commas inside the text column are tolerated.
      std::string text = fields[2];
      for (std::size_t f = 3; f < fields.size(); ++f) text += std::string(1, delim) + fields[f];
      const int id = parse_id(fields[0], line_no);
      if (auto [it, inserted] = seen.emplace(id, line_no); !inserted) {
        throw Error(ErrorCode::invalid_input, "line " + std::to_string(line_no) + ": duplicate id " +
                                                  std::to_string(id) + " (first seen on line " +
                                                  std::to_string(it->second) + ")");
      }
      const auto trimmed = trim(text);
      if (trimmed.empty()) {
        throw Error(ErrorCode::invalid_input, "line " + std::to_string(line_no) + ": blank item text");
      }
      Item item{id, std::string(trimmed), {}, {}};
      if (auto factor = trim(fields[1]); !factor.empty()) item.factor_label = std::string(factor);
      corpus.items.push_back(std::move(item));
    }
    if (corpus.items.empty()) throw Error(ErrorCode::invalid_input, "empty input: header without items");
    std::stable_sort(corpus.items.begin(), corpus.items.end(),
                     [](const Item& a, const Item& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < corpus.items.size(); ++i) {
      if (corpus.items[i].id != static_cast<int>(i + 1)) {
        throw Error(ErrorCode::invalid_input, "item ids must be contiguous from 1; missing id " +
                                                  std::to_string(i + 1));
      }
    }
  }

  if (options.language == "auto") {
    const bool han = std::any_of(corpus.items.begin(), corpus.items.end(),
                                 [](const Item& it) { return contains_han(it.text); });
    corpus.language = han ? "zh" : "en";
  } else {
    corpus.language = options.language;
  }
  return corpus;
}

std::string serialize_items(const ItemCorpus& corpus) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\t") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  };
  std::ostringstream os;
  os << "id,factor,text\n";
  for (const auto& item : corpus.items) {
    os << item.id << ',' << quote(item.factor_label.value_or("")) << ',' << quote(item.text) << '\n';
  }
  return os.str();
}

StopWords parse_stopwords(std::string_view text) {
  StopWords words;
  for (const auto& line : split_lines(text)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    words.insert(to_lower_ascii(t));
  }
  return words;
}

StopWords load_stopwords(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open stop-word file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_stopwords(buffer.str());
}

const StopWords& builtin_stopwords(std::string_view language) {
  static const StopWords en = parse_stopwords(detail::kStopwordsEn);
  static const StopWords zh = parse_stopwords(detail::kStopwordsZh);
  static const StopWords none;
  if (language == "en") return en;
  if (language == "zh") return zh;
  return none;
}

ItemCorpus tokenize(ItemCorpus corpus, const StopWords& stopwords, Warnings* warnings) {
  for (auto& item : corpus.items) {
    std::vector<std::string> candidates;
    if (item.pretokenized) {
      for (const auto& t : item.tokens) candidates.push_back(to_lower_ascii(t));
    } else {
      candidates = raw_tokens(item.text);
    }
    item.tokens.clear();
    for (auto& token : candidates) {
      if (token.empty() || is_numeric(token) || is_stop(token, stopwords)) continue;
      item.tokens.push_back(std::move(token));
    }
    if (item.tokens.empty() && warnings) {
      warnings->push_back("item " + std::to_string(item.id) +
                          ": no content tokens after stop-word removal");
    }
  }
  return corpus;
}

ItemCorpus tokenize(ItemCorpus corpus, Warnings* warnings) {
  const auto& stopwords = builtin_stopwords(corpus.language);
  return tokenize(std::move(corpus), stopwords, warnings);
}

std::vector<PolarityWarning> validate_polarity(const ItemCorpus& corpus,
                                               const std::vector<std::string>& markers) {
  std::vector<std::vector<std::string>> marker_words;
  for (const auto& m : markers) {
    auto words = words_for_polarity(m);
    if (!words.empty()) marker_words.push_back(std::move(words));
  }
  std::vector<PolarityWarning> out;
  for (const auto& item : corpus.items) {
    const auto words = words_for_polarity(item.text);
    for (const auto& mw : marker_words) {
      const auto hit = std::search(words.begin(), words.end(), mw.begin(), mw.end());
      if (hit == words.end()) continue;
      std::string marker;
      for (const auto& w : mw) marker += (marker.empty() ? "" : " ") + w;
      out.push_back({item.id, marker,
                     "item " + std::to_string(item.id) + " contains negation marker '" + marker +
                         "'; if reverse-keyed, rewrite it in the scale's scoring direction"});
      break;
    }
  }
  return out;
}

std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    int len = 0;
    char32_t cp = 0;
    if (c < 0x80) {
      cp = c;
      len = 1;
    } else if ((c & 0xE0) == 0xC0) {
      cp = c & 0x1F;
      len = 2;
    } else if ((c & 0xF0) == 0xE0) {
      cp = c & 0x0F;
      len = 3;
    } else if ((c & 0xF8) == 0xF0) {
      cp = c & 0x07;
      len = 4;
    } else {
      out.push_back(U'�');
      ++i;
      continue;
    }
    if (i + static_cast<std::size_t>(len) > s.size()) {
      out.push_back(U'�');
      break;
    }
    bool valid = true;
    for (int k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) {
        valid = false;
        break;
      }
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (!valid) {
      out.push_back(U'�');
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

std::string encode_utf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

bool is_han(char32_t cp) {
  return (cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) ||
         (cp >= 0xF900 && cp <= 0xFAFF) || (cp >= 0x20000 && cp <= 0x2FFFF);
}

}  // namespace semshort

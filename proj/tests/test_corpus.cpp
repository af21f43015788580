#include <doctest.h>

#include "semshort/corpus.hpp"
#include "support.hpp"

using namespace semshort;

namespace {

std::vector<std::string> tokens_of(const std::string& text, const std::string& language = "en") {
  ItemCorpus c;
  c.language = language;
  c.items.push_back({1, text, std::nullopt, {}, false});
  return tokenize(c).items[0].tokens;
}

}  // namespace

TEST_CASE("parse tables with factor columns") {
  const auto dass = testing::load_fixture("dass.csv");
  CHECK(dass.size() == 42);
  CHECK(dass.language == "en");
  std::set<std::string> factors;
  for (const auto& item : dass.items) factors.insert(*item.factor_label);
  CHECK(factors == std::set<std::string>{"A", "D", "S"});
  CHECK(dass.items[0].text == "I found myself getting upset by quite trivial things.");

  const auto epoch = testing::load_fixture("epoch_zh.csv");
  CHECK(epoch.size() == 20);
  CHECK(epoch.language == "zh");
  factors.clear();
  for (const auto& item : epoch.items) factors.insert(*item.factor_label);
  CHECK(factors.size() == 5);
}

TEST_CASE("parse plain text and prefixes") {
  auto c = parse_items("I feel happy.");
  CHECK(c.size() == 1);
  CHECK_FALSE(c.has_factor_labels());

  ParseOptions opts;
  opts.prefix = "Over the past week, ";
  c = parse_items("I feel happy.\nI love life.\n\n", opts);
  CHECK(c.size() == 2);
  CHECK(c.items[1].id == 2);
  CHECK(c.items[0].text == "I feel happy.");
  CHECK(c.embedding_text(0) == "Over the past week, I feel happy.");
}

TEST_CASE("parse accepts Q-prefixed ids and tab separators") {
  const auto c = parse_items("id\tfactor\ttext\nQ2\tB\tsecond\nQ1\tA\tfirst\n");
  REQUIRE(c.size() == 2);
  CHECK(c.items[0].id == 1);
  CHECK(c.items[0].text == "first");
  CHECK(*c.items[1].factor_label == "B");
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_items(""), Error);
  CHECK_THROWS_AS(parse_items("id,factor,text\n1,A,x\n1,B,y\n"), Error);
  CHECK_THROWS_AS(parse_items("id,factor,text\n1,A,x\n3,B,y\n"), Error);
  try {
    parse_items("first\n\nthird\n");
    FAIL("blank line accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("serialize round-trip") {
  auto c = testing::load_fixture("epoch_en.csv");
  const auto again = parse_items(serialize_items(c), {std::nullopt, true, "auto"});
  REQUIRE(again.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(again.items[i].id == c.items[i].id);
    CHECK(again.items[i].text == c.items[i].text);
    CHECK(again.items[i].factor_label == c.items[i].factor_label);
  }
  const auto zh = testing::load_fixture("epoch_zh.csv");
  CHECK(parse_items(serialize_items(zh), {std::nullopt, true, "auto"}).items == zh.items);
}

TEST_CASE("english tokenisation") {
  CHECK(tokens_of("I found it difficult to relax.") == std::vector<std::string>{"found", "difficult", "relax"});
  CHECK(tokens_of("I am 100% sure") == std::vector<std::string>{"sure"});
  CHECK(tokens_of("I sympathize with others' feelings.") == std::vector<std::string>{"sympathize", "others", "feelings"});
  CHECK(tokens_of("My friend's car") == std::vector<std::string>{"friend", "car"});
  CHECK(tokens_of("I couldn't seem to get going.") == std::vector<std::string>{"couldn", "seem", "get", "going"});
}

TEST_CASE("chinese tokenisation uses bigrams then characters") {
  CHECK(tokens_of("我很快乐。", "zh") == std::vector<std::string>{"很快", "快乐", "快", "乐"});
}

TEST_CASE("tokenise is idempotent and keeps emptied items") {
  Warnings w;
  auto c = tokenize(testing::load_fixture("dass.csv"), &w);
  CHECK(tokenize(c).items == c.items);

  ItemCorpus stop;
  stop.items.push_back({1, "It is what it was.", std::nullopt, {}, false});
  stop.items.push_back({2, "I love life.", std::nullopt, {}, false});
  Warnings warnings;
  const auto t = tokenize(stop, &warnings);
  CHECK(t.items[0].tokens.empty());
  CHECK(t.items[1].tokens == std::vector<std::string>{"love", "life"});
  REQUIRE(warnings.size() == 1);
}

TEST_CASE("stop words never include content words seen in topic keywords") {
  const auto& en = builtin_stopwords("en");
  for (const char* w : {"get", "found", "couldn", "feel", "life", "upset", "hard"}) CHECK_FALSE(en.contains(w));
  CHECK(en.contains("the"));
  CHECK(builtin_stopwords("xx").empty());
  CHECK(parse_stopwords("# comment\nfoo\n\n bar \n") == StopWords{"bar", "foo"});
}

TEST_CASE("pretokenized items are filtered only") {
  ItemCorpus c;
  c.items.push_back({1, "ignored text", std::nullopt, {"the", "Custom", "42", "term"}, true});
  const auto t = tokenize(c);
  CHECK(t.items[0].tokens == std::vector<std::string>{"custom", "term"});
}

TEST_CASE("polarity warnings") {
  ItemCorpus c;
  c.items.push_back({1, "I don't talk a lot.", std::nullopt, {}, false});
  c.items.push_back({2, "I talk a lot.", std::nullopt, {}, false});
  c.items.push_back({3, "I don’t mind being the center of attention.", std::nullopt, {}, false});
  c.items.push_back({4, "Nobody knows.", std::nullopt, {}, false});
  const auto w = validate_polarity(c);
  REQUIRE(w.size() == 2);
  CHECK(w[0].item_id == 1);
  CHECK(w[0].marker == "don't");
  CHECK(w[1].item_id == 3);
  CHECK(validate_polarity(ItemCorpus{}).empty());

  const auto original = testing::load_fixture("ipip_original.csv");
  CHECK(validate_polarity(original).size() > validate_polarity(testing::load_fixture("ipip.csv")).size());
}

TEST_CASE("utf8 helpers") {
  const auto cps = decode_utf8("a\xE4\xB8\xAD");
  REQUIRE(cps.size() == 2);
  CHECK(is_han(cps[1]));
  CHECK(encode_utf8(cps[1]) == "\xE4\xB8\xAD");
  CHECK(decode_utf8("\xFF")[0] == U'�');
}

#include <doctest.h>

#include <filesystem>

#include "binmt/text_pipeline.hpp"

using namespace binmt;

TEST_CASE("normalize maps typographic punctuation to ASCII") {
  CHECK(normalize("“hi”") == "\"hi\"");        // curly double quotes
  CHECK(normalize("‘x’") == "'x'");            // curly single quotes
  CHECK(normalize("a—b") == "a-b");                 // em dash
  CHECK(normalize("a–b") == "a-b");                 // en dash
  CHECK(normalize("wait…") == "wait...");           // ellipsis
  CHECK(normalize("a b") == "a b");                 // NBSP
  CHECK(normalize("«q»") == "\"q\"");          // guillemets
}

TEST_CASE("normalize collapses whitespace and strips controls") {
  CHECK(normalize("  a \t b  ") == "a b");
  CHECK(normalize("a b") == "a b");  // em space
  CHECK(normalize("") == "");
}

TEST_CASE("normalize rejects malformed UTF-8") {
  CHECK_THROWS(normalize(std::string("\xC3") + ""));  // truncated sequence
  CHECK_THROWS(normalize("\xFF\xFE"));
}

TEST_CASE("tokenize splits punctuation but keeps apostrophe clitics") {
  CHECK(tokenize("Hello, world!").tokens ==
        std::vector<std::string>{"Hello", ",", "world", "!"});
  CHECK(tokenize("don't").tokens == std::vector<std::string>{"don", "'t"});
  CHECK(tokenize("(a-b)").tokens == std::vector<std::string>{"(", "a", "-", "b", ")"});
  CHECK(tokenize("3.14 stays?").tokens ==
        std::vector<std::string>{"3", ".", "14", "stays", "?"});
  CHECK(tokenize("", "en").tokens.empty());
  CHECK(tokenize("x", "en").lang == "en");
}

TEST_CASE("truecaser prefers the most frequent non-initial form") {
  // "Paris" only ever appears capitalized (once non-initially)
  std::vector<Sentence> corpus = {
      Sentence({"He", "visited", "Paris", "today"}),
      Sentence({"Paris", "is", "large"}),
      Sentence({"The", "cat", "sat"}),
      Sentence({"the", "cat", "sat"}),
  };
  TruecaseModel m = learn_truecaser(corpus);
  CHECK(m.best_form.at("paris").first == "Paris");
  // non-initial evidence: one "visited", two "cat" etc.; "the" has one
  // non-initial occurrence? none -> fallback counts both "The" and "the";
  // ties prefer the all-lowercase form
  CHECK(m.best_form.at("the").first == "the");

  Sentence s({"The", "law", "of", "Paris"});
  Sentence t = apply_truecase(m, s);
  CHECK(t.tokens[0] == "the");    // sentence-initial token is rewritten
  CHECK(t.tokens[3] == "Paris");  // non-initial tokens are left alone
  CHECK(apply_truecase(m, t).tokens == t.tokens);  // idempotent
}

TEST_CASE("truecase model round-trips through its file format") {
  std::vector<Sentence> corpus = {Sentence({"a", "McDonald", "b", "McDonald"})};
  TruecaseModel m = learn_truecaser(corpus);
  auto tmp = std::filesystem::temp_directory_path() / "tc_test.model";
  m.save(tmp);
  TruecaseModel n = TruecaseModel::load(tmp);
  CHECK(n.best_form == m.best_form);
  std::filesystem::remove(tmp);
}

TEST_CASE("parallel filter drops empty and over-long pairs") {
  Sentence ok({"a", "b"}), empty, huge(std::vector<std::string>(81, "x"));
  std::vector<std::pair<Sentence, Sentence>> pairs = {
      {ok, ok}, {empty, ok}, {ok, huge}, {huge, huge}, {ok, ok}};
  auto kept = filter_parallel(pairs, 80);
  CHECK(kept.size() == 2);
}

TEST_CASE("mono filter keeps sentences strictly longer than the bound") {
  Sentence nine(std::vector<std::string>(9, "x")), ten(std::vector<std::string>(10, "x"));
  auto kept = filter_mono({nine, ten}, 9);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].size() == 10);
}

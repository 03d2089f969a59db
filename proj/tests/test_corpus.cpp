#include <doctest.h>

#include <filesystem>

#include "binmt/corpus.hpp"

using namespace binmt;

namespace {

TaggedPair mk(std::vector<std::string> src, std::vector<std::string> tgt) {
  TaggedPair p;
  p.source = Sentence(std::move(src), "de");
  p.target = Sentence(std::move(tgt), "en");
  p.src_lang = "de";
  p.tgt_lang = "en";
  p.provenance = Provenance::real;
  return p;
}

}  // namespace

TEST_CASE("tag rendering and detection") {
  CHECK(render_tag("en") == "<2en>");
  CHECK(render_tag("tl") == "<2tl>");
  Sentence s({"hallo", "welt"}, "de");
  Sentence tagged = tag_source(s, "en");
  CHECK(tagged.tokens.front() == "<2en>");
  CHECK(looks_tagged(tagged));
  CHECK(!looks_tagged(s));
  CHECK_THROWS(tag_source(tagged, "en"));  // double tagging is a bug upstream
}

TEST_CASE("swap_and_concat doubles the corpus with swapped tagged direction") {
  ParallelCorpus real = {mk({"a"}, {"b"}), mk({"c"}, {"d"})};
  ParallelCorpus both = swap_and_concat(real, true);
  REQUIRE(both.size() == 4);
  CHECK(both[0].source.tokens == std::vector<std::string>{"<2en>", "a"});
  CHECK(both[0].target.tokens == std::vector<std::string>{"b"});
  CHECK(both[2].source.tokens == std::vector<std::string>{"<2de>", "b"});
  CHECK(both[2].target.tokens == std::vector<std::string>{"a"});
  CHECK(both[2].src_lang == "en");
  CHECK(both[2].tgt_lang == "de");
}

TEST_CASE("presets expose the expected component sets") {
  CHECK(preset_recipe("B-1").components ==
        std::vector<Component>{Component::l1_to_l2, Component::l2_to_l1});
  CHECK(preset_recipe("B-4").components.size() == 6);
  CHECK(preset_recipe("B-5").components.size() == 4);
  CHECK(preset_recipe("B-6").components == preset_recipe("B-5").components);
  CHECK(!preset_recipe("U-1").tagged);
  CHECK(preset_recipe("B-2").tagged);
  CHECK_THROWS(preset_recipe("B-9"));
}

TEST_CASE("recipe parsing accepts component lists") {
  DataRecipe r = parse_recipe({"L1>L2", "L2>L1", "L1*>L2"});
  CHECK(r.components.size() == 3);
  CHECK(r.components[2] == Component::syn1_to_l2);
  CHECK_THROWS(parse_recipe({"L1*>L2"}));          // no real component
  CHECK_THROWS(parse_recipe({"L1>L2", "L1>L2"}));  // duplicate
}

TEST_CASE("build_recipe composes pools and flags missing synthetic data") {
  ParallelCorpus real = {mk({"a"}, {"b"})};
  // (L1*, L2) synthetic pool: source is synthetic German
  TaggedPair syn = mk({"a2"}, {"b2"});
  syn.provenance = Provenance::synthetic_source;
  ParallelCorpus syn1 = {syn};

  ParallelCorpus b1 = build_recipe(preset_recipe("B-1"), real, {}, {});
  CHECK(b1.size() == 2);
  for (const auto& p : b1) CHECK(looks_tagged(p.source));

  ParallelCorpus b2 = build_recipe(preset_recipe("B-2"), real, syn1, {});
  CHECK(b2.size() == 4);  // L1>L2, L2>L1, L1*>L2, L2>L1*

  CHECK_THROWS_WITH_AS(build_recipe(preset_recipe("B-5"), real, syn1, {}),
                       doctest::Contains("L2*>L1"), std::runtime_error);
}

TEST_CASE("untagged preset leaves sources untouched") {
  ParallelCorpus real = {mk({"a"}, {"b"})};
  ParallelCorpus u1 = build_recipe(preset_recipe("U-1"), real, {}, {});
  REQUIRE(u1.size() == 1);
  CHECK(!looks_tagged(u1[0].source));
}

TEST_CASE("oversampling repeats only the requested component") {
  ParallelCorpus real = {mk({"a"}, {"b"})};
  TaggedPair syn = mk({"a2"}, {"b2"});
  syn.provenance = Provenance::synthetic_source;
  ParallelCorpus out = build_recipe(preset_recipe("B-2"), real, {syn},
                                    {}, {{Component::l1_to_l2, 3}});
  // B-2 yields 4 pairs; oversampling L1>L2 x3 adds 2 copies
  CHECK(out.size() == 6);
}

TEST_CASE("component_of classifies built pairs") {
  ParallelCorpus real = {mk({"a"}, {"b"})};
  TaggedPair syn = mk({"a2"}, {"b2"});
  syn.provenance = Provenance::synthetic_source;
  ParallelCorpus b4 = build_recipe(preset_recipe("B-4"), real, {syn}, {syn});
  std::map<Component, int> seen;
  for (const auto& p : b4) seen[component_of(p, "de", "en")]++;
  CHECK(seen.size() == 6);
}

TEST_CASE("corpus TSV round trip preserves direction and provenance") {
  ParallelCorpus c = build_recipe(preset_recipe("B-2"), {mk({"a", "x"}, {"b"})},
                                  {[] {
                                    TaggedPair p = mk({"s"}, {"t"});
                                    p.provenance = Provenance::synthetic_source;
                                    return p;
                                  }()},
                                  {});
  auto tmp = std::filesystem::temp_directory_path() / "corpus_test.tsv";
  save_corpus(tmp, c);
  ParallelCorpus d = load_corpus(tmp);
  REQUIRE(d.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(d[i].source == c[i].source);
    CHECK(d[i].target == c[i].target);
    CHECK(d[i].provenance == c[i].provenance);
    CHECK(d[i].src_lang == c[i].src_lang);
    CHECK(d[i].tgt_lang == c[i].tgt_lang);
  }
  std::filesystem::remove(tmp);
}

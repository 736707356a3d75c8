#include <doctest.h>

#include <set>
#include <sstream>

#include "oracles.hpp"
#include "propdet/corpus.hpp"
#include "propdet/text.hpp"
#include "test_util.hpp"

using namespace propdet;

namespace {

std::vector<PropagandaSpan> parse_si(const std::string& text) {
  std::istringstream in(text);
  return parse_si_labels(in);
}

std::vector<TechniqueSpan> parse_tc(const std::string& text) {
  std::istringstream in(text);
  return parse_tc_labels(in);
}

}  // namespace

TEST_CASE("load_article extracts the id and keeps bytes") {
  testutil::TempDir dir("corpus");
  testutil::write_file(dir.path() / "article111111111.txt", "Some text.\n");
  const Article a = load_article(dir.path() / "article111111111.txt");
  CHECK(a.id == "111111111");
  CHECK(a.text == "Some text.\n");

  testutil::write_file(dir.path() / "article7.txt", "");
  const Article empty = load_article(dir.path() / "article7.txt");
  CHECK(empty.id == "7");
  CHECK(empty.text.empty());
}

TEST_CASE("load_article rejects bad names, encodings and missing files") {
  testutil::TempDir dir("corpus");
  testutil::write_file(dir.path() / "notes.txt", "x");
  CHECK_THROWS_AS(load_article(dir.path() / "notes.txt"), ValidationError);
  CHECK_THROWS_AS(load_article(dir.path() / "article42.txt"),
                  ValidationError);
  testutil::write_file(dir.path() / "article42.txt", std::string("\xFF\xFE"));
  CHECK_THROWS_AS(load_article(dir.path() / "article42.txt"), ParseError);
  testutil::write_file(dir.path() / "articleX9.txt", "x");
  CHECK_THROWS_AS(load_article(dir.path() / "articleX9.txt"),
                  ValidationError);
}

TEST_CASE("parse_si_labels reads tab-separated offset rows in order") {
  const auto spans = parse_si(
      "111111111\t265\t323\n"
      "111111111\t1069\t1091\n"
      "111111111\t1577\t1616\n");
  REQUIRE(spans.size() == 3);
  CHECK(spans[0] == PropagandaSpan{"111111111", 265, 323});
  CHECK(spans[1] == PropagandaSpan{"111111111", 1069, 1091});
  CHECK(spans[2] == PropagandaSpan{"111111111", 1577, 1616});
}

TEST_CASE("parse_si_labels tolerates a trailing text column and blank lines") {
  const auto spans = parse_si(
      "1\t0\t4\tsome quoted text\n"
      "\n"
      "2\t3\t9\n");
  REQUIRE(spans.size() == 2);
  CHECK(spans[0] == PropagandaSpan{"1", 0, 4});
  CHECK(spans[1] == PropagandaSpan{"2", 3, 9});
}

TEST_CASE("parse_si_labels reports positioned errors") {
  CHECK_THROWS_WITH_AS(parse_si("111111111\t323\t265\n"),
                       "begin >= end at line 1", ParseError);
  CHECK_THROWS_WITH_AS(parse_si("1\t0\t4\n1\t5\t5\n"),
                       "begin >= end at line 2", ParseError);
  CHECK_THROWS_AS(parse_si("1\t0\n"), ParseError);
  CHECK_THROWS_AS(parse_si("1\tzero\t4\n"), ParseError);
  CHECK_THROWS_AS(parse_si("1\t-3\t4\n"), ParseError);
  CHECK_THROWS_AS(parse_si("1 0 4\n"), ParseError);  // spaces, not tabs
}

TEST_CASE("parse_tc_labels resolves techniques against the taxonomy") {
  const auto spans = parse_tc(
      "111111111\tAppeal_to_Authority\t265\t323\n"
      "111111111\tRepetition\t1069\t1091\n"
      "111111111\tAppeal_to_fear-prejudice\t1577\t1616\n");
  REQUIRE(spans.size() == 3);
  CHECK(spans[0].technique == Technique::AppealToAuthority);
  CHECK(spans[0].span == PropagandaSpan{"111111111", 265, 323});
  CHECK(spans[1].technique == Technique::Repetition);
  CHECK(spans[2].technique == Technique::AppealToFearPrejudice);
}

TEST_CASE("parse_tc_labels accepts any casing but rejects unknown names") {
  const auto spans = parse_tc(
      "1\tDOUBT\t0\t5\n"
      "1\tloaded_language\t6\t9\n");
  CHECK(spans[0].technique == Technique::Doubt);
  CHECK(spans[1].technique == Technique::LoadedLanguage);
  CHECK_THROWS_WITH_AS(parse_tc("1\tSarcasm\t0\t5\n"),
                       "unknown technique \"Sarcasm\" at line 1", ParseError);
  CHECK_THROWS_AS(parse_tc("1\tDoubt\t0\n"), ParseError);
}

TEST_CASE("taxonomy has exactly 14 canonical names") {
  CHECK(all_techniques().size() == 14);
  std::set<std::string> names;
  for (Technique t : all_techniques()) {
    names.insert(std::string(technique_name(t)));
    CHECK(parse_technique(technique_name(t)) == t);
    CHECK(parse_technique(ascii_lower(technique_name(t))) == t);
  }
  CHECK(names.size() == 14);
  CHECK(names.count("Name_Calling,Labeling") == 1);
  CHECK(names.count("Whataboutism,Straw_Men,Red_Herring") == 1);
  CHECK(!parse_technique("Sarcasm").has_value());
}

TEST_CASE("write_predictions emits the task formats") {
  CHECK(write_predictions(std::vector<PropagandaSpan>{{"1", 0, 4}}) ==
        "1\t0\t4\n");
  CHECK(write_predictions(std::vector<TechniqueSpan>{
            {{"1", 3, 9}, Technique::Doubt}}) == "1\tDoubt\t3\t9\n");
  CHECK(write_predictions(std::vector<PropagandaSpan>{}).empty());
}

TEST_CASE("label files round-trip through write and parse") {
  Rng rng(1234);
  for (int iter = 0; iter < 60; ++iter) {
    std::vector<PropagandaSpan> si;
    std::vector<TechniqueSpan> tc;
    const std::size_t n = rng.index(12);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string id = std::to_string(1 + rng.index(999999));
      const std::size_t begin = rng.index(5000);
      const PropagandaSpan s{id, begin, begin + 1 + rng.index(300)};
      si.push_back(s);
      tc.push_back(TechniqueSpan{
          s, static_cast<Technique>(rng.index(kTechniqueCount))});
    }
    CHECK(parse_si(write_predictions(si)) == si);
    CHECK(parse_tc(write_predictions(tc)) == tc);
  }
}

TEST_CASE("label_distribution counts per technique") {
  SUBCASE("empty") {
    const LabelDistribution d = label_distribution({});
    CHECK(d.total() == 0);
    for (Technique t : all_techniques()) CHECK(d[t] == 0);
  }
  SUBCASE("direct counts") {
    std::vector<TechniqueSpan> spans;
    for (int i = 0; i < 3; ++i) {
      spans.push_back({{"1", 0, 1}, Technique::Doubt});
    }
    spans.push_back({{"1", 2, 3}, Technique::Slogans});
    const LabelDistribution d = label_distribution(spans);
    CHECK(d[Technique::Doubt] == 3);
    CHECK(d[Technique::Slogans] == 1);
    CHECK(d[Technique::LoadedLanguage] == 0);
    CHECK(d.total() == 4);
  }
  SUBCASE("large imbalanced distribution sums") {
    const std::map<Technique, std::size_t> reference_counts = {
        {Technique::AppealToAuthority, 155},
        {Technique::AppealToFearPrejudice, 321},
        {Technique::BandwagonReductioAdHitlerum, 77},
        {Technique::BlackAndWhiteFallacy, 112},
        {Technique::CausalOversimplification, 212},
        {Technique::Doubt, 517},
        {Technique::ExaggerationMinimisation, 493},
        {Technique::FlagWaving, 250},
        {Technique::LoadedLanguage, 2200},
        {Technique::NameCallingLabeling, 1105},
        {Technique::Repetition, 621},
        {Technique::Slogans, 138},
        {Technique::ThoughtTerminatingCliches, 80},
        {Technique::WhataboutismStrawMenRedHerring, 109},
    };
    std::vector<TechniqueSpan> spans;
    for (const auto& [technique, count] : reference_counts) {
      for (std::size_t i = 0; i < count; ++i) {
        spans.push_back({{"1", i, i + 1}, technique});
      }
    }
    const LabelDistribution d = label_distribution(spans);
    std::size_t hand_sum = 0;
    for (const auto& [technique, count] : reference_counts) {
      CHECK(d[technique] == count);
      hand_sum += count;
    }
    CHECK(hand_sum == 6390);
    CHECK(d.total() == 6390);
  }
}

TEST_CASE("validate_spans rejects out-of-range and unknown-article spans") {
  std::map<std::string, Article> articles;
  articles["1"] = Article{"1", "0123456789"};
  validate_spans(articles, std::vector<PropagandaSpan>{{"1", 0, 10}});

  const std::vector<PropagandaSpan> beyond = {{"1", 5, 11}};
  const std::vector<std::size_t> lines = {4};
  CHECK_THROWS_WITH_AS(validate_spans(articles, beyond, &lines),
                       "article 1: span [5, 11) exceeds text length 10 "
                       "at line 4",
                       ValidationError);
  CHECK_THROWS_AS(
      validate_spans(articles, std::vector<PropagandaSpan>{{"2", 0, 1}}),
      ValidationError);
}

TEST_CASE("validate_spans counts code points, not bytes") {
  std::map<std::string, Article> articles;
  articles["1"] = Article{"1", "εé中"};  // 3 code points
  validate_spans(articles, std::vector<PropagandaSpan>{{"1", 0, 3}});
  CHECK_THROWS_AS(
      validate_spans(articles, std::vector<PropagandaSpan>{{"1", 0, 4}}),
      ValidationError);
}

TEST_CASE("span length equals the length of the covered fragment") {
  const std::string fragment =
      "The next transmission could be more pronounced or stronger";
  CHECK(fragment.size() == 58);
  CHECK(323 - 265 == 58);
  // an article carrying the fragment at offset 265 slices it back exactly
  std::string text(265, 'x');
  text += fragment;
  text += std::string(20, 'y');
  const Article article{"111111111", text};
  CHECK(codepoint_slice(article.text, 265, 323) == fragment);
}

TEST_CASE("load_article_dir keys articles by id") {
  testutil::TempDir dir("corpusdir");
  testutil::write_file(dir.path() / "article5.txt", "five");
  testutil::write_file(dir.path() / "article12.txt", "twelve");
  testutil::write_file(dir.path() / "README", "not an article");
  const auto articles = load_article_dir(dir.path());
  CHECK(articles.size() == 2);
  CHECK(articles.at("5").text == "five");
  CHECK(articles.at("12").text == "twelve");
  CHECK_THROWS_AS(load_article_dir(dir.path() / "missing"), ValidationError);
}

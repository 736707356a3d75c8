#include "propdet/fixture.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <set>

#include "propdet/embeddings.hpp"
#include "propdet/nn.hpp"

namespace propdet {

namespace {

const std::vector<std::string> kFillers = {
    "the",    "a",       "market", "report", "council", "said",
    "today",  "group",   "plan",   "city",   "new",     "data",
    "meeting", "budget", "river",  "garden", "window",  "music",
    "stone",  "coffee",  "train",  "letter", "engine",  "harvest",
    "bridge", "signal",  "orchard", "meadow", "copper",  "lantern"};

struct TriggerClass {
  Technique technique;
  std::array<const char*, 3> words;
};

const std::array<TriggerClass, 4> kTriggers = {{
    {Technique::LoadedLanguage, {"venomous", "blistering", "ruinous"}},
    {Technique::NameCallingLabeling, {"traitor", "puppet", "crook"}},
    {Technique::Doubt, {"allegedly", "supposedly", "dubious"}},
    {Technique::FlagWaving, {"homeland", "patriots", "motherland"}},
}};

struct SentencePlan {
  std::vector<std::string> tokens;
  // token index ranges [first, last] of each trigger run, with its class
  std::vector<std::tuple<std::size_t, std::size_t, int>> runs;
};

SentencePlan plan_sentence(Rng& rng, int forced_class) {
  SentencePlan plan;
  int n_runs;
  if (forced_class >= 0) {
    n_runs = 1;
  } else {
    const double u = rng.uniform01();
    n_runs = u < 0.25 ? 0 : (u < 0.70 ? 1 : 2);
  }
  auto add_fillers = [&](std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      plan.tokens.push_back(kFillers[rng.index(kFillers.size())]);
    }
  };
  add_fillers(1 + rng.index(3));
  for (int r = 0; r < n_runs; ++r) {
    const int cls =
        forced_class >= 0 ? forced_class : static_cast<int>(rng.index(4));
    const std::size_t run_len = rng.bernoulli(0.3) ? 2 : 1;
    const std::size_t first = plan.tokens.size();
    for (std::size_t k = 0; k < run_len; ++k) {
      plan.tokens.push_back(kTriggers[cls].words[rng.index(3)]);
    }
    plan.runs.emplace_back(first, plan.tokens.size() - 1, cls);
    add_fillers(1 + rng.index(3));
  }
  plan.tokens.push_back(".");
  return plan;
}

void append_sentence(const SentencePlan& plan, std::string& text,
                     std::size_t& offset, const std::string& article_id,
                     Fixture& fixture) {
  std::vector<std::size_t> starts(plan.tokens.size());
  std::vector<std::size_t> ends(plan.tokens.size());
  for (std::size_t i = 0; i < plan.tokens.size(); ++i) {
    if (i > 0) {
      text += ' ';
      ++offset;
    }
    starts[i] = offset;
    text += plan.tokens[i];
    offset += plan.tokens[i].size();  // fixture text is pure ASCII
    ends[i] = offset;
  }
  for (const auto& [first, last, cls] : plan.runs) {
    PropagandaSpan span{article_id, starts[first], ends[last]};
    fixture.si_gold.push_back(span);
    fixture.tc_gold.push_back(
        TechniqueSpan{span, kTriggers[cls].technique});
  }
}

}  // namespace

const std::vector<Technique>& fixture_techniques() {
  static const std::vector<Technique> techniques = [] {
    std::vector<Technique> t;
    for (const auto& cls : kTriggers) t.push_back(cls.technique);
    return t;
  }();
  return techniques;
}

const std::vector<std::string>& fixture_vocabulary() {
  static const std::vector<std::string> vocab = [] {
    std::set<std::string> words(kFillers.begin(), kFillers.end());
    for (const auto& cls : kTriggers) {
      for (const char* w : cls.words) words.insert(w);
    }
    words.insert(".");
    return std::vector<std::string>(words.begin(), words.end());
  }();
  return vocab;
}

Fixture generate_fixture(const FixtureOptions& options) {
  Rng rng(options.seed);
  Fixture fixture;

  std::set<int> seen_classes;
  for (int a = 0; a < options.articles; ++a) {
    Article article;
    article.id = std::to_string(100000001 + a);
    std::string text;
    std::size_t offset = 0;
    for (int s = 0; s < options.sentences_per_article; ++s) {
      if (s > 0) {
        text += '\n';
        ++offset;
      }
      const SentencePlan plan = plan_sentence(rng, -1);
      for (const auto& run : plan.runs) seen_classes.insert(std::get<2>(run));
      append_sentence(plan, text, offset, article.id, fixture);
    }
    // Every fixture technique must occur somewhere; the last article picks
    // up one extra sentence per class that never came up.
    if (a == options.articles - 1) {
      for (int cls = 0; cls < static_cast<int>(kTriggers.size()); ++cls) {
        if (seen_classes.count(cls)) continue;
        text += '\n';
        ++offset;
        append_sentence(plan_sentence(rng, cls), text, offset, article.id,
                        fixture);
      }
    }
    article.text = std::move(text);
    fixture.articles.push_back(std::move(article));
  }
  return fixture;
}

void write_fixture_dir(const Fixture& fixture,
                       const std::filesystem::path& dir, int vector_dim) {
  std::filesystem::create_directories(dir);
  for (const auto& article : fixture.articles) {
    std::ofstream out(dir / ("article" + article.id + ".txt"),
                      std::ios::binary);
    out << article.text;

    std::vector<PropagandaSpan> si;
    std::vector<TechniqueSpan> tc;
    for (const auto& s : fixture.si_gold) {
      if (s.article_id == article.id) si.push_back(s);
    }
    for (const auto& s : fixture.tc_gold) {
      if (s.span.article_id == article.id) tc.push_back(s);
    }
    std::ofstream si_out(dir / ("article" + article.id + ".task1-SI"));
    si_out << write_predictions(si);
    std::ofstream tc_out(dir / ("article" + article.id + ".task2-TC"));
    tc_out << write_predictions(tc);
  }

  std::ofstream vec(dir / "vectors.txt");
  char buf[64];
  for (const auto& token : fixture_vocabulary()) {
    vec << token;
    const Eigen::VectorXd v =
        hash_vector(token, vector_dim, kFixtureVectorSeed);
    for (int k = 0; k < vector_dim; ++k) {
      std::snprintf(buf, sizeof(buf), " %.17g", v[k]);
      vec << buf;
    }
    vec << '\n';
  }
}

}  // namespace propdet

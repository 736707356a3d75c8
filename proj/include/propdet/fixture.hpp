#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "propdet/corpus.hpp"

namespace propdet {

// Deterministic synthetic corpus: sentence-per-line articles in which a
// small closed set of trigger words always carries propaganda, with the
// technique determined by the trigger. Gold spans cover exactly the
// trigger runs (token-aligned, separated by at least one plain word), so
// the tagging task is separable by keyword.
struct FixtureOptions {
  int articles = 10;
  int sentences_per_article = 3;
  std::uint64_t seed = 1;
};

struct Fixture {
  std::vector<Article> articles;
  std::vector<PropagandaSpan> si_gold;
  std::vector<TechniqueSpan> tc_gold;
};

// Four techniques appear in fixtures; each is guaranteed at least one span.
const std::vector<Technique>& fixture_techniques();
// Fillers, trigger words and punctuation — everything a fixture can emit.
const std::vector<std::string>& fixture_vocabulary();

Fixture generate_fixture(const FixtureOptions& options);

// Seed for the word vectors shipped with fixtures (vectors.txt), shared by
// every fixture directory so train/dev vectors always agree.
inline constexpr std::uint64_t kFixtureVectorSeed = 42;

// Writes article{ID}.txt, article{ID}.task1-SI, article{ID}.task2-TC per
// article plus vectors.txt covering the vocabulary at vector_dim.
void write_fixture_dir(const Fixture& fixture,
                       const std::filesystem::path& dir, int vector_dim);

}  // namespace propdet

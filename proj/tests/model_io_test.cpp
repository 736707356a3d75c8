#include <doctest.h>

#include "oracles.hpp"
#include "propdet/fixture.hpp"
#include "propdet/model_io.hpp"
#include "test_util.hpp"

using namespace propdet;

namespace {

WordVectorTable small_vectors() {
  std::ostringstream text;
  char buf[64];
  for (const auto& token : fixture_vocabulary()) {
    text << token;
    const Eigen::VectorXd v = hash_vector(token, 12, kFixtureVectorSeed);
    for (int k = 0; k < 12; ++k) {
      std::snprintf(buf, sizeof(buf), " %.17g", v[k]);
      text << buf;
    }
    text << '\n';
  }
  std::istringstream in(text.str());
  return WordVectorTable::load(in);
}

}  // namespace

TEST_CASE("config JSON round-trips every field") {
  TaggerConfig si;
  si.bidirectional = true;
  si.epochs = 3;
  si.decision_threshold = 0.4;
  si.seed = 99;
  const TaggerConfig si_back = tagger_config_from_json(
      tagger_config_to_json(si));
  CHECK(si_back.bidirectional == si.bidirectional);
  CHECK(si_back.epochs == si.epochs);
  CHECK(si_back.decision_threshold == si.decision_threshold);
  CHECK(si_back.seed == si.seed);

  ClassifierConfig tc;
  tc.representation = TcRepresentation::provider_sentence_vector;
  tc.head = TcHead::boosted_trees;
  tc.trees.rounds = 9;
  tc.class_weights = std::vector<double>(14, 2.0);
  const ClassifierConfig tc_back = classifier_config_from_json(
      classifier_config_to_json(tc));
  CHECK(tc_back.representation == tc.representation);
  CHECK(tc_back.head == tc.head);
  CHECK(tc_back.trees.rounds == 9);
  REQUIRE(tc_back.class_weights.has_value());
  CHECK((*tc_back.class_weights)[0] == 2.0);
}

TEST_CASE("saved tagger bundles reload to identical predictions") {
  const Fixture fixture = generate_fixture({4, 2, 33});
  const WordVectorTable vectors = small_vectors();
  std::vector<TaggedSequence> sequences;
  for (const auto& article : fixture.articles) {
    const auto s = make_tagged_sequences(article, fixture.si_gold);
    sequences.insert(sequences.end(), s.begin(), s.end());
  }
  TaggerConfig config;
  config.embedding_dim = 12;
  config.hidden_units = 10;
  config.epochs = 4;
  config.seed = 3;
  const TaggerModel model = train_tagger(sequences, vectors, config);

  testutil::TempDir dir("bundle");
  save_si_bundle(dir.path() / "run", model, "vectors.txt", ProviderSpec{});
  CHECK(std::filesystem::exists(dir.path() / "run" / "history.csv"));
  const SiBundle loaded = load_si_bundle(dir.path() / "run");
  CHECK(loaded.vectors_path == "vectors.txt");
  CHECK(loaded.model.fwd.w.value == model.fwd.w.value);  // exact doubles
  REQUIRE(loaded.model.history.size() == model.history.size());
  for (const auto& article : fixture.articles) {
    CHECK(predict_spans(loaded.model, article, vectors) ==
          predict_spans(model, article, vectors));
  }
}

TEST_CASE("saved classifier bundles reload exactly, trees included") {
  const Fixture fixture = generate_fixture({4, 2, 34});
  std::map<std::string, Article> articles;
  for (const auto& a : fixture.articles) articles.emplace(a.id, a);
  const auto instances = build_instances(articles, fixture.tc_gold);
  HashEmbeddingProvider provider(20, 0);
  TcResources resources;
  resources.provider = &provider;
  ClassifierConfig config;
  config.representation = TcRepresentation::provider_sentence_vector;
  config.input_dim = 20;
  config.head = TcHead::boosted_trees;
  config.trees.rounds = 8;
  const ClassifierModel model =
      train_classifier(instances, resources, config);

  testutil::TempDir dir("bundle");
  ProviderSpec spec;
  spec.type = "mock";
  spec.dim = 20;
  save_tc_bundle(dir.path() / "run", model, "", spec);
  const TcBundle loaded = load_tc_bundle(dir.path() / "run");
  REQUIRE(loaded.model.trees.has_value());
  CHECK(loaded.provider.type == "mock");
  CHECK(loaded.model.class_order == model.class_order);
  for (const auto& inst : instances) {
    const auto a = classify(model, inst, resources);
    const auto b = classify(loaded.model, inst, resources);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
  }
}

TEST_CASE("corrupted bundles surface as config errors") {
  testutil::TempDir dir("bundle");
  std::filesystem::create_directories(dir.path() / "run");
  testutil::write_file(dir.path() / "run" / "model.json", "{\"kind\": 42}");
  CHECK_THROWS_AS(load_si_bundle(dir.path() / "run"), ConfigError);
  testutil::write_file(dir.path() / "run" / "model.json",
                       "{\"kind\": \"tc\"}");
  CHECK_THROWS_AS(load_tc_bundle(dir.path() / "run"), ConfigError);
  CHECK_THROWS_AS(load_si_bundle(dir.path() / "nowhere"), ConfigError);
}

TEST_CASE("kind mismatch between bundles is rejected") {
  const Fixture fixture = generate_fixture({2, 2, 35});
  const WordVectorTable vectors = small_vectors();
  std::vector<TaggedSequence> sequences;
  for (const auto& article : fixture.articles) {
    const auto s = make_tagged_sequences(article, fixture.si_gold);
    sequences.insert(sequences.end(), s.begin(), s.end());
  }
  TaggerConfig config;
  config.embedding_dim = 12;
  config.hidden_units = 6;
  config.epochs = 1;
  const TaggerModel model = train_tagger(sequences, vectors, config);
  testutil::TempDir dir("bundle");
  save_si_bundle(dir.path() / "run", model, "v.txt", ProviderSpec{});
  CHECK_THROWS_AS(load_tc_bundle(dir.path() / "run"), ConfigError);
}

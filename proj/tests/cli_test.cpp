#include <doctest.h>

#include <filesystem>

#include "test_util.hpp"

using testutil::TempDir;
using testutil::run_cli;

TEST_CASE("help exits 0, bad usage exits 2") {
  TempDir dir("cli");
  CHECK(run_cli("--help", dir.path()).exit_code == 0);
  CHECK(run_cli("no-such-command", dir.path()).exit_code == 2);
  CHECK(run_cli("score-si", dir.path()).exit_code == 2);  // missing args
}

TEST_CASE("missing input files exit 2") {
  TempDir dir("cli");
  const auto r = run_cli("score-si --gold " + dir.str() + "/none.tsv --pred " +
                             dir.str() + "/none.tsv",
                         dir.path());
  CHECK(r.exit_code == 2);
  CHECK(run_cli("train-si --config " + dir.str() +
                    "/missing.json --train-dir " + dir.str() + " --out " +
                    dir.str() + "/run",
                dir.path())
            .exit_code == 2);
}

TEST_CASE("config schema violations exit 2") {
  TempDir dir("cli");
  testutil::write_file(dir.path() / "bad_key.json",
                       R"({"si": {"hidden_nodes": 150}})");
  testutil::write_file(dir.path() / "bad_value.json",
                       R"({"si": {"dropout_rate": 1.5}})");
  testutil::write_file(dir.path() / "bad_json.json", "{not json");
  for (const char* name : {"bad_key.json", "bad_value.json", "bad_json.json"}) {
    const auto r = run_cli("train-si --config " + dir.str() + "/" + name +
                               " --train-dir " + dir.str() + " --out " +
                               dir.str() + "/run",
                           dir.path());
    CHECK(r.exit_code == 2);
  }
}

TEST_CASE("gen-fixture is deterministic for a fixed seed") {
  TempDir dir("cli");
  const std::string a = dir.str() + "/a";
  const std::string b = dir.str() + "/b";
  REQUIRE(run_cli("gen-fixture --out " + a + " --articles 3 --sentences 2"
                  " --seed 77 --vector-dim 12",
                  dir.path())
              .exit_code == 0);
  REQUIRE(run_cli("gen-fixture --out " + b + " --articles 3 --sentences 2"
                  " --seed 77 --vector-dim 12",
                  dir.path())
              .exit_code == 0);
  std::size_t compared = 0;
  for (const auto& entry : std::filesystem::directory_iterator(a)) {
    const auto name = entry.path().filename();
    CHECK(testutil::read_file(entry.path()) ==
          testutil::read_file(std::filesystem::path(b) / name));
    ++compared;
  }
  CHECK(compared == 10);  // 3 articles x 3 files + vectors.txt

  // a different seed changes the corpus
  const std::string c = dir.str() + "/c";
  REQUIRE(run_cli("gen-fixture --out " + c + " --articles 3 --sentences 2"
                  " --seed 78 --vector-dim 12",
                  dir.path())
              .exit_code == 0);
  CHECK(testutil::read_file(std::filesystem::path(a) / "article100000001.txt") !=
        testutil::read_file(std::filesystem::path(c) / "article100000001.txt"));
}

TEST_CASE("score-si prints F1 1.000 when predictions equal gold") {
  TempDir dir("cli");
  const std::string gold = dir.str() + "/gold.tsv";
  testutil::write_file(gold, "1\t0\t4\n1\t10\t25\n2\t3\t9\n");
  const auto r =
      run_cli("score-si --gold " + gold + " --pred " + gold, dir.path());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("F1 1.000") != std::string::npos);
}

TEST_CASE("score-tc reports accuracy and both macro variants") {
  TempDir dir("cli");
  const std::string gold = dir.str() + "/gold.tsv";
  const std::string pred = dir.str() + "/pred.tsv";
  testutil::write_file(gold,
                       "1\tDoubt\t0\t4\n1\tDoubt\t5\t9\n1\tSlogans\t10\t14\n");
  testutil::write_file(pred,
                       "1\tDoubt\t0\t4\n1\tSlogans\t5\t9\n1\tSlogans\t10\t14\n");
  const auto r =
      run_cli("score-tc --gold " + gold + " --pred " + pred, dir.path());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("accuracy 0.667") != std::string::npos);
  CHECK(r.output.find("micro-F1 0.667") != std::string::npos);
}

TEST_CASE("compare rejects unknown variants") {
  TempDir dir("cli");
  testutil::write_file(dir.path() / "cfg.json", "{}");
  const auto r = run_cli(
      "compare --subtask si --config " + dir.str() + "/cfg.json" +
          " --train-dir " + dir.str() + " --eval-dir " + dir.str() +
          " --out " + dir.str() + "/cmp --models bert-base --mock-embeddings",
      dir.path());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("unknown variant") != std::string::npos);
}

TEST_CASE("train, predict and score round-trip through the bundle") {
  TempDir dir("cli");
  const std::string root = dir.str();
  testutil::write_file(dir.path() / "cfg.json",
                       R"({"si": {"epochs": 2, "hidden_units": 8}})");
  REQUIRE(run_cli("gen-fixture --out " + root + "/data --articles 3"
                  " --sentences 2 --seed 5 --vector-dim 12",
                  dir.path())
              .exit_code == 0);
  REQUIRE(run_cli("train-si --config " + root + "/cfg.json --train-dir " +
                      root + "/data --out " + root + "/run",
                  dir.path())
              .exit_code == 0);
  CHECK(std::filesystem::exists(root + "/run/model.json"));
  CHECK(std::filesystem::exists(root + "/run/history.csv"));
  REQUIRE(run_cli("predict-si --model " + root + "/run --articles " + root +
                      "/data --out " + root + "/pred.tsv",
                  dir.path())
              .exit_code == 0);
  // the prediction file is valid task TSV: scoring it parses both sides
  const auto scored = run_cli("score-si --gold " + root +
                                  "/data/article100000001.task1-SI --pred " +
                                  root + "/pred.tsv",
                              dir.path());
  CHECK(scored.exit_code == 0);
  CHECK(scored.output.find("F1 ") != std::string::npos);
}

TEST_CASE("duplicate compare variants get distinct seeds") {
  TempDir dir("cli");
  const std::string root = dir.str();
  testutil::write_file(
      dir.path() / "cfg.json",
      R"({"tc": {"epochs": 1, "dense_units": 4, "input_dim": 16}})");
  REQUIRE(run_cli("gen-fixture --out " + root + "/data --articles 2"
                  " --sentences 2 --seed 5 --vector-dim 12",
                  dir.path())
              .exit_code == 0);
  const auto result = run_cli(
      "compare --subtask tc --config " + root + "/cfg.json --train-dir " +
          root + "/data --eval-dir " + root + "/data --out " + root +
          "/cmp --models provider-direct --models provider-direct"
          " --mock-embeddings",
      dir.path());
  REQUIRE(result.exit_code == 0);
  const std::string csv = testutil::read_file(root + "/cmp/compare-tc.csv");
  CHECK(csv.find("provider-direct,7,") != std::string::npos);
  CHECK(csv.find("provider-direct,8,") != std::string::npos);
}

TEST_CASE("the endpoint variable overrides the configured service") {
  TempDir dir("cli");
  const std::string root = dir.str();
  testutil::write_file(dir.path() / "cfg.json",
                       R"({"tc": {"epochs": 1, "input_dim": 8}})");
  REQUIRE(run_cli("gen-fixture --out " + root + "/data --articles 2"
                  " --sentences 2 --seed 5 --vector-dim 12",
                  dir.path())
              .exit_code == 0);
  // nothing listens on port 1; the failure must name the overridden endpoint
  const auto result = run_cli(
      "train-tc --config " + root + "/cfg.json --train-dir " + root +
          "/data --out " + root + "/run",
      dir.path(), "PROPDET_EMBEDDING_ENDPOINT=127.0.0.1:1");
  CHECK(result.exit_code == 1);
  CHECK(result.output.find("127.0.0.1:1") != std::string::npos);
}

TEST_CASE("lr-sweep validates its rate list") {
  TempDir dir("cli");
  testutil::write_file(dir.path() / "cfg.json", "{}");
  const std::string common = " --config " + dir.str() + "/cfg.json" +
                             " --train-dir " + dir.str() + " --dev-dir " +
                             dir.str() + " --out " + dir.str() + "/sweep";
  CHECK(run_cli("lr-sweep" + common + " --rates 0.01", dir.path()).exit_code ==
        2);
  CHECK(run_cli("lr-sweep" + common + " --rates 0.01 0.0", dir.path())
            .exit_code == 2);
}

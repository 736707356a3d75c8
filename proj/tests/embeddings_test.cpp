#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "oracles.hpp"
#include "propdet/embeddings.hpp"
#include "propdet/service_client.hpp"

// httplib after Eigen: its transitive system headers clash otherwise
#include <httplib.h>

using namespace propdet;

namespace {

WordVectorTable load(const std::string& text,
                     std::optional<int> expected = std::nullopt) {
  std::istringstream in(text);
  return WordVectorTable::load(in, expected);
}

}  // namespace

TEST_CASE("word vectors load with inferred dimension") {
  const WordVectorTable t = load("the 0.1 0.2\ncat 0.3 0.4\n");
  CHECK(t.dim() == 2);
  CHECK(t.size() == 2);
  CHECK(t.lookup("the")[0] == 0.1);
  CHECK(t.lookup("the")[1] == 0.2);
  CHECK(t.lookup("cat")[0] == 0.3);
  // stored values are exactly what strtod produces for the file text
  CHECK(t.lookup("cat")[1] == std::strtod("0.4", nullptr));
}

TEST_CASE("word vector loader error paths") {
  CHECK_THROWS_WITH_AS(load("a 1.0\nb 1.0 2.0\n"),
                       "dimension mismatch at line 2 (got 2, expected 1)",
                       ParseError);
  CHECK_THROWS_AS(load(""), ParseError);
  CHECK_THROWS_AS(load("\n\n"), ParseError);
  CHECK_THROWS_AS(load("a 1.0 oops\n"), ParseError);
  CHECK_THROWS_AS(load("lonely\n"), ParseError);
  CHECK_THROWS_AS(load("a 1.0 2.0\n", 3), ParseError);
  CHECK(load("a 1.0 2.0 3.0\n", 3).dim() == 3);
}

TEST_CASE("duplicate tokens: last entry wins") {
  const WordVectorTable t = load("a 1.0\na 2.0\n");
  CHECK(t.size() == 1);
  CHECK(t.lookup("a")[0] == 2.0);
}

TEST_CASE("unseen tokens map to the zero vector") {
  const WordVectorTable t = load("the 0.1 0.2\n");
  const Eigen::VectorXd& oov = t.lookup("zzz");
  CHECK(oov.size() == 2);
  CHECK(oov.isZero(0));
  CHECK(!t.contains("zzz"));
}

TEST_CASE("lookup_sequence builds one row per token") {
  const WordVectorTable t = load("the 0.1 0.2\ncat 0.3 0.4\n");
  const std::vector<Token> tokens = {{"the", 0, 3}, {"cat", 4, 7}};
  const Eigen::MatrixXd m = lookup_sequence(t, tokens, false);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 2);
  CHECK(m(0, 0) == 0.1);
  CHECK(m(1, 1) == 0.4);

  const Eigen::MatrixXd empty = lookup_sequence(t, {}, false);
  CHECK(empty.rows() == 0);
  CHECK(empty.cols() == 2);

  // lowercase flag folds "The" onto the stored entry
  const std::vector<Token> upper = {{"The", 0, 3}};
  CHECK(lookup_sequence(t, upper, true).row(0) ==
        t.lookup("the").transpose());
  CHECK(lookup_sequence(t, upper, false).row(0).isZero(0));
}

TEST_CASE("hash provider follows its documented rule") {
  // Recompute the documented construction from scratch: FNV-1a 64 over the
  // bytes, xor the splitmix64-mixed seed, then mt19937_64 bits to [-1, 1).
  const std::string text = "abc";
  const std::uint64_t seed = 9;
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  std::mt19937_64 engine(h ^ z);
  Eigen::VectorXd want(4);
  for (int k = 0; k < 4; ++k) {
    want[k] = static_cast<double>(engine() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  }

  HashEmbeddingProvider provider(4, seed);
  const Eigen::VectorXd got = provider.embed(text);
  for (int k = 0; k < 4; ++k) CHECK(got[k] == want[k]);
  CHECK(hash_vector(text, 4, seed) == got);
}

TEST_CASE("providers are deterministic and validate dimensions") {
  HashEmbeddingProvider provider(16, 0);
  const Eigen::VectorXd a = provider.embed("same fragment");
  const Eigen::VectorXd b = provider.embed("same fragment");
  CHECK(a == b);
  CHECK(provider.embed("other fragment") != a);

  const std::vector<Token> tokens = {{"one", 0, 3}, {"two", 4, 7}};
  const Eigen::MatrixXd m = provider.embed_tokens(tokens);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 16);
  CHECK(m.row(0).transpose() == provider.embed("one"));
}

TEST_CASE("embed_fragment is identical with and without the cache") {
  auto inner = std::make_shared<HashEmbeddingProvider>(8, 3);
  CachingEmbeddingProvider cached(inner);
  HashEmbeddingProvider plain(8, 3);
  for (const std::string text : {"a", "b", "a", "c", "b"}) {
    CHECK(embed_fragment(cached, text) == embed_fragment(plain, text));
  }
  CHECK(cached.cache_size() == 3);
}

namespace {

// Counts how many fragments reach the wrapped provider.
class CountingProvider : public EmbeddingProvider {
 public:
  explicit CountingProvider(int dim) : dim_(dim) {}
  int dim() const override { return dim_; }
  Eigen::MatrixXd embed_batch(const std::vector<std::string>& texts) override {
    fetched += texts.size();
    Eigen::MatrixXd out(texts.size(), dim_);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      out.row(i) = hash_vector(texts[i], dim_, 1).transpose();
    }
    return out;
  }
  std::size_t fetched = 0;

 private:
  int dim_;
};

}  // namespace

TEST_CASE("cache deduplicates batches and repeat calls") {
  auto inner = std::make_shared<CountingProvider>(4);
  CachingEmbeddingProvider cached(inner);
  const Eigen::MatrixXd out =
      cached.embed_batch({"x", "y", "x", "x", "y"});
  CHECK(out.rows() == 5);
  CHECK(inner->fetched == 2);
  CHECK(out.row(0) == out.row(2));
  cached.embed_batch({"x", "y"});
  CHECK(inner->fetched == 2);  // everything served from the cache
}

TEST_CASE("the cache is safe under concurrent embedding") {
  auto inner = std::make_shared<HashEmbeddingProvider>(8, 5);
  CachingEmbeddingProvider cached(inner);
  HashEmbeddingProvider plain(8, 5);
  std::vector<std::string> fragments;
  for (int i = 0; i < 40; ++i) fragments.push_back("frag" + std::to_string(i % 13));

  std::atomic<int> mismatches{0};
  std::vector<std::thread> workers;
  for (int w = 0; w < 4; ++w) {
    workers.emplace_back([&, w] {
      for (int round = 0; round < 50; ++round) {
        const auto& text = fragments[(w * 7 + round) % fragments.size()];
        if (cached.embed(text) != plain.embed(text)) ++mismatches;
      }
    });
  }
  for (auto& t : workers) t.join();
  CHECK(mismatches.load() == 0);
  CHECK(cached.cache_size() == 13);
}

TEST_CASE("service client round-trips batches over HTTP") {
  httplib::Server server;
  const int dim = 6;
  std::atomic<int> requests{0};
  server.Post("/v1/embeddings", [&](const httplib::Request& req,
                                    httplib::Response& res) {
    ++requests;
    const auto body = nlohmann::json::parse(req.body);
    nlohmann::json vectors = nlohmann::json::array();
    for (const auto& text : body.at("texts")) {
      const Eigen::VectorXd v =
          hash_vector(text.get<std::string>(), dim, 77);
      std::vector<double> row(v.data(), v.data() + v.size());
      vectors.push_back(row);
    }
    res.set_content(nlohmann::json{{"vectors", vectors}}.dump(),
                    "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread serving([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ServiceEmbeddingProvider::Options options;
  options.host = "127.0.0.1";
  options.port = port;
  options.dim = dim;
  ServiceEmbeddingProvider client(options);
  const Eigen::MatrixXd out = client.embed_batch({"alpha", "beta"});
  CHECK(out.rows() == 2);
  CHECK(out.row(0).transpose() == hash_vector("alpha", dim, 77));
  CHECK(out.row(1).transpose() == hash_vector("beta", dim, 77));
  CHECK(client.embed("alpha") == out.row(0).transpose());
  CHECK(requests.load() >= 2);

  server.stop();
  serving.join();
}

TEST_CASE("service client surfaces dimension drift and dead endpoints") {
  httplib::Server server;
  server.Post("/v1/embeddings", [&](const httplib::Request& req,
                                    httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    nlohmann::json vectors = nlohmann::json::array();
    for (std::size_t i = 0; i < body.at("texts").size(); ++i) {
      vectors.push_back(std::vector<double>{1.0, 2.0});  // wrong dimension
    }
    res.set_content(nlohmann::json{{"vectors", vectors}}.dump(),
                    "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread serving([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ServiceEmbeddingProvider::Options options;
  options.host = "127.0.0.1";
  options.port = port;
  options.dim = 5;
  ServiceEmbeddingProvider client(options);
  CHECK_THROWS_AS(client.embed_batch({"some fragment"}), ProviderError);
  server.stop();
  serving.join();

  // nothing listens on the port anymore: the error names the fragment
  options.timeout_ms = 500;
  ServiceEmbeddingProvider dead(options);
  try {
    dead.embed("lost fragment");
    FAIL("expected ProviderError");
  } catch (const ProviderError& e) {
    CHECK(std::string(e.what()).find("lost fragment") != std::string::npos);
  }
}

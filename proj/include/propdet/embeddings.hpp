#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "propdet/tokenization.hpp"

namespace propdet {

// Embedding-provider transport/contract failures.
struct ProviderError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Static per-word vectors loaded from `token v1 v2 ... vd` lines.
// Read-only after load; lookups of unseen tokens return the zero vector.
class WordVectorTable {
 public:
  static WordVectorTable load(std::istream& in,
                              std::optional<int> expected_dim = std::nullopt);

  int dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  bool contains(const std::string& token) const {
    return vectors_.count(token) > 0;
  }
  const Eigen::VectorXd& lookup(const std::string& token) const;

 private:
  int dim_ = 0;
  std::unordered_map<std::string, Eigen::VectorXd> vectors_;
  Eigen::VectorXd oov_;
};

// Row i holds the vector of tokens[i].surface (ASCII-lowercased first when
// lowercase is set).
Eigen::MatrixXd lookup_sequence(const WordVectorTable& table,
                                const std::vector<Token>& tokens,
                                bool lowercase);

// Fixed-dimension vectors for text fragments. Implementations must be
// deterministic within a session: same text, same vector.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual int dim() const = 0;
  // Rows ordered like texts. Implementations report transport problems via
  // ProviderError.
  virtual Eigen::MatrixXd embed_batch(const std::vector<std::string>& texts) = 0;

  // Single fragment; validates dimension and finiteness.
  Eigen::VectorXd embed(const std::string& text);
  // Per-token vectors: each token surface embedded as its own fragment.
  Eigen::MatrixXd embed_tokens(const std::vector<Token>& tokens);
};

Eigen::VectorXd embed_fragment(EmbeddingProvider& provider,
                               const std::string& text);

std::uint64_t fnv1a64(std::string_view bytes);

// Deterministic pseudo-embedding: an mt19937_64 engine is seeded with
// fnv1a64(text) ^ splitmix64(seed) and each component is
// (engine() >> 11) * 2^-53 * 2 - 1, i.e. uniform in [-1, 1).
Eigen::VectorXd hash_vector(std::string_view text, int dim,
                            std::uint64_t seed);

// Offline stand-in for the embedding service, built on hash_vector.
class HashEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit HashEmbeddingProvider(int dim, std::uint64_t seed = 0)
      : dim_(dim), seed_(seed) {}
  int dim() const override { return dim_; }
  std::uint64_t seed() const { return seed_; }
  Eigen::MatrixXd embed_batch(const std::vector<std::string>& texts) override;

 private:
  int dim_;
  std::uint64_t seed_;
};

// Thread-safe exact-text cache in front of any provider. Duplicate
// fragments are common in the data, so repeat lookups never re-fetch.
class CachingEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit CachingEmbeddingProvider(std::shared_ptr<EmbeddingProvider> inner)
      : inner_(std::move(inner)) {}
  int dim() const override { return inner_->dim(); }
  Eigen::MatrixXd embed_batch(const std::vector<std::string>& texts) override;
  std::size_t cache_size() const;

 private:
  std::shared_ptr<EmbeddingProvider> inner_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, Eigen::VectorXd> cache_;
};

}  // namespace propdet

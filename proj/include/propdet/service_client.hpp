#pragma once

#include <string>

#include "propdet/embeddings.hpp"

namespace propdet {

// HTTP client for an external embedding service. Wire protocol:
// POST {path} with body {"texts": [...]} returns {"vectors": [[...], ...]}
// where every inner array has exactly `dim` numbers, ordered like the
// request. Anything else is a ProviderError.
class ServiceEmbeddingProvider : public EmbeddingProvider {
 public:
  struct Options {
    std::string host = "127.0.0.1";
    int port = 5555;
    int timeout_ms = 10000;
    int dim = 768;
    std::string path = "/v1/embeddings";
  };

  explicit ServiceEmbeddingProvider(Options options)
      : options_(std::move(options)) {}

  int dim() const override { return options_.dim; }
  const Options& options() const { return options_; }
  Eigen::MatrixXd embed_batch(const std::vector<std::string>& texts) override;

 private:
  Options options_;
};

}  // namespace propdet

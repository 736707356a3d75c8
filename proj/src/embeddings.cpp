#include "propdet/embeddings.hpp"

#include <cmath>
#include <istream>
#include <random>
#include <sstream>

#include "propdet/corpus.hpp"
#include "propdet/text.hpp"

namespace propdet {

WordVectorTable WordVectorTable::load(std::istream& in,
                                      std::optional<int> expected_dim) {
  WordVectorTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string token;
    ss >> token;
    std::vector<double> values;
    double v = 0;
    while (ss >> v) values.push_back(v);
    if (!ss.eof()) {
      throw ParseError("unparseable vector component at line " +
                       std::to_string(line_no));
    }
    if (values.empty()) {
      throw ParseError("no vector components at line " +
                       std::to_string(line_no));
    }
    if (table.dim_ == 0) {
      table.dim_ = static_cast<int>(values.size());
      if (expected_dim && *expected_dim != table.dim_) {
        throw ParseError("vector dimension " + std::to_string(table.dim_) +
                         " does not match expected " +
                         std::to_string(*expected_dim) + " at line " +
                         std::to_string(line_no));
      }
    } else if (static_cast<int>(values.size()) != table.dim_) {
      throw ParseError("dimension mismatch at line " +
                       std::to_string(line_no) + " (got " +
                       std::to_string(values.size()) + ", expected " +
                       std::to_string(table.dim_) + ")");
    }
    Eigen::VectorXd vec(table.dim_);
    for (int k = 0; k < table.dim_; ++k) vec[k] = values[k];
    table.vectors_[token] = std::move(vec);  // duplicates: last wins
  }
  if (table.dim_ == 0) {
    throw ParseError("empty word-vector stream");
  }
  table.oov_ = Eigen::VectorXd::Zero(table.dim_);
  return table;
}

const Eigen::VectorXd& WordVectorTable::lookup(const std::string& token) const {
  const auto it = vectors_.find(token);
  return it == vectors_.end() ? oov_ : it->second;
}

Eigen::MatrixXd lookup_sequence(const WordVectorTable& table,
                                const std::vector<Token>& tokens,
                                bool lowercase) {
  Eigen::MatrixXd rows(tokens.size(), table.dim());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Eigen::VectorXd& v =
        lowercase ? table.lookup(ascii_lower(tokens[i].surface))
                  : table.lookup(tokens[i].surface);
    rows.row(i) = v.transpose();
  }
  return rows;
}

Eigen::VectorXd EmbeddingProvider::embed(const std::string& text) {
  const Eigen::MatrixXd out = embed_batch({text});
  if (out.rows() != 1 || out.cols() != dim()) {
    throw ProviderError("provider returned " + std::to_string(out.rows()) +
                        "x" + std::to_string(out.cols()) +
                        " for one fragment of expected dimension " +
                        std::to_string(dim()));
  }
  const Eigen::VectorXd v = out.row(0).transpose();
  if (!v.allFinite()) {
    throw ProviderError("provider returned non-finite components for \"" +
                        text + "\"");
  }
  return v;
}

Eigen::MatrixXd EmbeddingProvider::embed_tokens(
    const std::vector<Token>& tokens) {
  std::vector<std::string> surfaces;
  surfaces.reserve(tokens.size());
  for (const auto& t : tokens) surfaces.push_back(t.surface);
  Eigen::MatrixXd out = embed_batch(surfaces);
  if (out.rows() != static_cast<Eigen::Index>(tokens.size()) ||
      (tokens.size() > 0 && out.cols() != dim())) {
    throw ProviderError("provider returned wrong shape for a token batch");
  }
  return out;
}

Eigen::VectorXd embed_fragment(EmbeddingProvider& provider,
                               const std::string& text) {
  return provider.embed(text);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

Eigen::VectorXd hash_vector(std::string_view text, int dim,
                            std::uint64_t seed) {
  std::mt19937_64 engine(fnv1a64(text) ^ splitmix64(seed));
  Eigen::VectorXd v(dim);
  for (int k = 0; k < dim; ++k) {
    v[k] = static_cast<double>(engine() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  }
  return v;
}

Eigen::MatrixXd HashEmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) {
  Eigen::MatrixXd out(texts.size(), dim_);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out.row(i) = hash_vector(texts[i], dim_, seed_).transpose();
  }
  return out;
}

Eigen::MatrixXd CachingEmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) {
  std::vector<std::string> misses;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    for (const auto& t : texts) {
      if (!cache_.count(t)) {
        // dedupe within the batch
        bool queued = false;
        for (const auto& m : misses) {
          if (m == t) { queued = true; break; }
        }
        if (!queued) misses.push_back(t);
      }
    }
  }
  if (!misses.empty()) {
    const Eigen::MatrixXd fetched = inner_->embed_batch(misses);
    if (fetched.rows() != static_cast<Eigen::Index>(misses.size()) ||
        fetched.cols() != dim()) {
      throw ProviderError("provider returned wrong shape for a batch of " +
                          std::to_string(misses.size()) + " fragments");
    }
    std::lock_guard<std::mutex> lock(mutex_);
    for (std::size_t i = 0; i < misses.size(); ++i) {
      cache_[misses[i]] = fetched.row(i).transpose();
    }
  }
  std::lock_guard<std::mutex> lock(mutex_);
  Eigen::MatrixXd out(texts.size(), dim());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out.row(i) = cache_.at(texts[i]).transpose();
  }
  return out;
}

std::size_t CachingEmbeddingProvider::cache_size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return cache_.size();
}

}  // namespace propdet

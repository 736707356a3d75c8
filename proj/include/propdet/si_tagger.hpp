#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "propdet/embeddings.hpp"
#include "propdet/nn.hpp"
#include "propdet/tokenization.hpp"

namespace propdet {

struct TaggerConfig {
  int embedding_dim = 100;
  int hidden_units = 150;
  int dense_units = 8;
  double dropout_rate = 0.2;
  bool bidirectional = false;
  double learning_rate = 0.01;
  std::string optimizer = "adam";
  int epochs = 50;
  int batch_size = 16;
  int max_sequence_length = 128;
  double decision_threshold = 0.5;
  double positive_class_weight = 1.0;
  bool lowercase = true;
  // Restore the best-dev-F1 checkpoint after training (needs a dev set).
  bool select_best_dev = false;
  std::uint64_t seed = 7;

  void validate() const;  // throws ValidationError on out-of-range fields
};

struct EpochStats {
  int epoch = 0;
  double loss = 0;
  std::optional<double> metric;  // dev span F1 for the tagger
};

// Per-token binary tagger: frozen word vectors -> LSTM -> position-wise
// dense -> sigmoid. Immutable once trained; inference is deterministic
// (dropout only acts during training).
struct TaggerModel {
  TaggerConfig config;
  LstmParams fwd;
  std::optional<LstmParams> bwd;  // present iff config.bidirectional
  Param dense_w, dense_b;         // dense_units x encoder_out
  Param out_w, out_b;             // 1 x dense_units, 1 x 1
  std::vector<EpochStats> history;

  int encoder_out() const {
    return config.bidirectional ? 2 * config.hidden_units
                                : config.hidden_units;
  }
  std::vector<Param*> params();
};

// Maps a token sequence to its embedding matrix (rows = tokens).
using TokenEmbedder = std::function<Eigen::MatrixXd(const std::vector<Token>&)>;

TokenEmbedder table_embedder(const WordVectorTable& table, bool lowercase);
TokenEmbedder provider_token_embedder(EmbeddingProvider& provider);

// Seeded parameter initialization without any training (empty history).
TaggerModel init_tagger(const TaggerConfig& config);

// Trains with per-token binary cross-entropy and Adam. Reproducible for
// fixed (data, config, seed). history records per-epoch mean token loss
// and, when dev is given, dev span F1.
TaggerModel train_tagger(const std::vector<TaggedSequence>& train,
                         const WordVectorTable& vectors,
                         const TaggerConfig& config,
                         const std::vector<TaggedSequence>* dev = nullptr);
TaggerModel train_tagger_with(const std::vector<TaggedSequence>& train,
                              const TokenEmbedder& embed,
                              const TaggerConfig& config,
                              const std::vector<TaggedSequence>* dev = nullptr);

// One probability per token. Positions beyond max_sequence_length are not
// run through the model and report probability 0.
std::vector<double> predict_probabilities(const TaggerModel& model,
                                          const std::vector<Token>& tokens,
                                          const WordVectorTable& vectors);
std::vector<double> predict_probabilities_with(const TaggerModel& model,
                                               const std::vector<Token>& tokens,
                                               const TokenEmbedder& embed);

// Per line: tokenize, predict, threshold (strictly greater), decode runs
// into spans. Spans never cross line boundaries; output sorted by offset.
std::vector<PropagandaSpan> predict_spans(const TaggerModel& model,
                                          const Article& article,
                                          const WordVectorTable& vectors);
std::vector<PropagandaSpan> predict_spans_with(const TaggerModel& model,
                                               const Article& article,
                                               const TokenEmbedder& embed);

// Char-level span F1 of thresholded predictions against the sequences'
// own labels (used for dev tracking and the comparison harness).
double span_f1_on_sequences(const TaggerModel& model,
                            const std::vector<TaggedSequence>& sequences,
                            const TokenEmbedder& embed);

}  // namespace propdet

#include "propdet/si_tagger.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "propdet/metrics.hpp"

namespace propdet {

namespace {

constexpr double kProbFloor = 1e-12;

struct EmbeddedSequence {
  std::string article_id;
  std::vector<Token> tokens;
  std::vector<int> labels;
  Eigen::MatrixXd inputs;  // tokens x embedding_dim
};

struct Forward {
  LstmTrace fwd;
  std::optional<LstmTrace> bwd;
  Eigen::MatrixXd u;     // T x encoder_out
  Eigen::MatrixXd a;     // T x dense_units, tanh activation
  Eigen::MatrixXd mask;  // dropout masks (ones at inference)
  Eigen::VectorXd prob;  // T
};

Forward run_forward(const TaggerModel& model, const Eigen::MatrixXd& x,
                    bool training, Rng* rng) {
  const int T = static_cast<int>(x.rows());
  Forward f;
  f.fwd = lstm_forward(model.fwd, x, false);
  if (model.bwd) {
    f.bwd = lstm_forward(*model.bwd, x, true);
    f.u.resize(T, model.encoder_out());
    f.u.leftCols(model.config.hidden_units) = f.fwd.h;
    f.u.rightCols(model.config.hidden_units) = f.bwd->h;
  } else {
    f.u = f.fwd.h;
  }
  f.a = ((f.u * model.dense_w.value.transpose()).rowwise() +
         model.dense_b.value.col(0).transpose())
            .array()
            .tanh();
  if (training && model.config.dropout_rate > 0) {
    f.mask.resize(T, model.config.dense_units);
    for (int t = 0; t < T; ++t) {
      f.mask.row(t) =
          dropout_mask(model.config.dense_units, model.config.dropout_rate,
                       *rng)
              .transpose();
    }
  } else {
    f.mask = Eigen::MatrixXd::Ones(T, model.config.dense_units);
  }
  const Eigen::MatrixXd ad = f.a.cwiseProduct(f.mask);
  const Eigen::VectorXd logits =
      ad * model.out_w.value.row(0).transpose() +
      Eigen::VectorXd::Constant(T, model.out_b.value(0, 0));
  f.prob = logits.unaryExpr([](double z) { return sigmoid(z); });
  return f;
}

// Accumulates gradients for one sequence; dlogit is d(loss)/d(pre-sigmoid).
void run_backward(TaggerModel& model, const Forward& f,
                  const Eigen::VectorXd& dlogit) {
  const Eigen::MatrixXd ad = f.a.cwiseProduct(f.mask);
  model.out_w.grad.row(0) += dlogit.transpose() * ad;
  model.out_b.grad(0, 0) += dlogit.sum();

  const Eigen::MatrixXd dad = dlogit * model.out_w.value.row(0);
  const Eigen::MatrixXd da = dad.cwiseProduct(f.mask);
  const Eigen::MatrixXd dpre =
      da.cwiseProduct((1.0 - f.a.array().square()).matrix());
  model.dense_w.grad.noalias() += dpre.transpose() * f.u;
  model.dense_b.grad.col(0) += dpre.colwise().sum().transpose();

  const Eigen::MatrixXd du = dpre * model.dense_w.value;
  if (model.bwd) {
    const int H = model.config.hidden_units;
    lstm_backward(model.fwd, f.fwd, du.leftCols(H));
    lstm_backward(*model.bwd, *f.bwd, du.rightCols(H));
  } else {
    lstm_backward(model.fwd, f.fwd, du);
  }
}

std::vector<EmbeddedSequence> embed_sequences(
    const std::vector<TaggedSequence>& sequences, const TokenEmbedder& embed,
    int max_len, int expected_dim) {
  std::vector<EmbeddedSequence> out;
  out.reserve(sequences.size());
  for (const auto& seq : sequences) {
    if (seq.tokens.empty()) {
      throw ValidationError("sequence with no tokens in article " +
                            seq.article_id);
    }
    if (seq.tokens.size() != seq.labels.size()) {
      throw ValidationError("sequence label count mismatch in article " +
                            seq.article_id);
    }
    EmbeddedSequence e;
    e.article_id = seq.article_id;
    e.tokens = seq.tokens;
    e.labels = seq.labels;
    if (static_cast<int>(e.tokens.size()) > max_len) {
      e.tokens.resize(max_len);
      e.labels.resize(max_len);
    }
    e.inputs = embed(e.tokens);
    if (e.inputs.cols() != expected_dim) {
      throw ValidationError(
          "embedding dimension mismatch: got " +
          std::to_string(e.inputs.cols()) + ", config expects " +
          std::to_string(expected_dim));
    }
    out.push_back(std::move(e));
  }
  return out;
}

double dev_span_f1(const TaggerModel& model,
                   const std::vector<EmbeddedSequence>& dev) {
  std::vector<PropagandaSpan> gold, pred;
  for (const auto& seq : dev) {
    const auto g = decode_spans(seq.article_id, seq.tokens, seq.labels);
    gold.insert(gold.end(), g.begin(), g.end());
    const Forward f = run_forward(model, seq.inputs, false, nullptr);
    std::vector<int> labels(seq.tokens.size(), 0);
    for (std::size_t t = 0; t < seq.tokens.size(); ++t) {
      labels[t] = f.prob[static_cast<int>(t)] > model.config.decision_threshold
                      ? 1
                      : 0;
    }
    const auto p = decode_spans(seq.article_id, seq.tokens, labels);
    pred.insert(pred.end(), p.begin(), p.end());
  }
  return score_si(gold, pred).f1;
}

struct Snapshot {
  std::vector<Eigen::MatrixXd> values;
};

Snapshot take_snapshot(TaggerModel& model) {
  Snapshot s;
  for (Param* p : model.params()) s.values.push_back(p->value);
  return s;
}

void restore_snapshot(TaggerModel& model, const Snapshot& s) {
  const auto params = model.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i]->value = s.values[i];
  }
}

TaggerModel init_params(const TaggerConfig& config, Rng& rng) {
  TaggerModel model;
  model.config = config;
  model.fwd.init(config.embedding_dim, config.hidden_units, rng);
  if (config.bidirectional) {
    model.bwd.emplace();
    model.bwd->init(config.embedding_dim, config.hidden_units, rng);
  }
  const double dense_limit =
      glorot_limit(model.encoder_out(), config.dense_units);
  model.dense_w.init_uniform(config.dense_units, model.encoder_out(),
                             dense_limit, rng);
  model.dense_b.init_zero(config.dense_units, 1);
  model.out_w.init_uniform(1, config.dense_units,
                           glorot_limit(config.dense_units, 1), rng);
  model.out_b.init_zero(1, 1);
  return model;
}

TaggerModel train_impl(std::vector<EmbeddedSequence> train,
                       const TaggerConfig& config,
                       const std::vector<EmbeddedSequence>* dev) {
  if (train.empty()) throw ValidationError("empty training set");

  Rng rng(config.seed);
  TaggerModel model = init_params(config, rng);
  if (config.epochs == 0) return model;

  AdamOptimizer optimizer(config.learning_rate);
  const auto params = model.params();
  const double wpos = config.positive_class_weight;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  double best_dev = -1;
  Snapshot best;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0;
    long long epoch_tokens = 0;
    for (std::size_t at = 0; at < order.size();
         at += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t batch_end = std::min(
          order.size(), at + static_cast<std::size_t>(config.batch_size));
      for (Param* p : params) p->zero_grad();
      long long batch_tokens = 0;
      for (std::size_t k = at; k < batch_end; ++k) {
        batch_tokens += static_cast<long long>(train[order[k]].tokens.size());
      }
      for (std::size_t k = at; k < batch_end; ++k) {
        const auto& seq = train[order[k]];
        const int T = static_cast<int>(seq.tokens.size());
        const Forward f = run_forward(model, seq.inputs, true, &rng);
        Eigen::VectorXd dlogit(T);
        for (int t = 0; t < T; ++t) {
          const double y = seq.labels[static_cast<std::size_t>(t)];
          const double p =
              std::clamp(f.prob[t], kProbFloor, 1.0 - kProbFloor);
          epoch_loss -= wpos * y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
          dlogit[t] = (p * ((1.0 - y) + wpos * y) - wpos * y) /
                      static_cast<double>(batch_tokens);
        }
        run_backward(model, f, dlogit);
      }
      optimizer.step(params);
      epoch_tokens += batch_tokens;
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.loss = epoch_loss / static_cast<double>(epoch_tokens);
    if (dev) {
      const double f1 = dev_span_f1(model, *dev);
      stats.metric = f1;
      if (config.select_best_dev && f1 > best_dev) {
        best_dev = f1;
        best = take_snapshot(model);
      }
    }
    model.history.push_back(stats);
  }

  if (config.select_best_dev && dev && best_dev >= 0) {
    restore_snapshot(model, best);
  }
  return model;
}

}  // namespace

void TaggerConfig::validate() const {
  if (embedding_dim < 1) throw ValidationError("embedding_dim must be >= 1");
  if (hidden_units < 1) throw ValidationError("hidden_units must be >= 1");
  if (dense_units < 1) throw ValidationError("dense_units must be >= 1");
  if (dropout_rate < 0 || dropout_rate >= 1) {
    throw ValidationError("dropout_rate must be in [0, 1)");
  }
  if (learning_rate <= 0) throw ValidationError("learning_rate must be > 0");
  if (optimizer != "adam") {
    throw ValidationError("unsupported optimizer \"" + optimizer + "\"");
  }
  if (epochs < 0) throw ValidationError("epochs must be >= 0");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (max_sequence_length < 1) {
    throw ValidationError("max_sequence_length must be >= 1");
  }
  if (decision_threshold <= 0 || decision_threshold >= 1) {
    throw ValidationError("decision_threshold must be in (0, 1)");
  }
  if (positive_class_weight <= 0) {
    throw ValidationError("positive_class_weight must be > 0");
  }
}

std::vector<Param*> TaggerModel::params() {
  std::vector<Param*> all = {&fwd.w, &fwd.b};
  if (bwd) {
    all.push_back(&bwd->w);
    all.push_back(&bwd->b);
  }
  all.push_back(&dense_w);
  all.push_back(&dense_b);
  all.push_back(&out_w);
  all.push_back(&out_b);
  return all;
}

TokenEmbedder table_embedder(const WordVectorTable& table, bool lowercase) {
  return [&table, lowercase](const std::vector<Token>& tokens) {
    return lookup_sequence(table, tokens, lowercase);
  };
}

TokenEmbedder provider_token_embedder(EmbeddingProvider& provider) {
  return [&provider](const std::vector<Token>& tokens) {
    if (tokens.empty()) {
      return Eigen::MatrixXd(0, provider.dim());
    }
    return provider.embed_tokens(tokens);
  };
}

TaggerModel init_tagger(const TaggerConfig& config) {
  config.validate();
  Rng rng(config.seed);
  return init_params(config, rng);
}

TaggerModel train_tagger(const std::vector<TaggedSequence>& train,
                         const WordVectorTable& vectors,
                         const TaggerConfig& config,
                         const std::vector<TaggedSequence>* dev) {
  config.validate();
  if (vectors.dim() != config.embedding_dim) {
    throw ValidationError("word-vector dimension " +
                          std::to_string(vectors.dim()) +
                          " does not match config.embedding_dim " +
                          std::to_string(config.embedding_dim));
  }
  return train_tagger_with(train, table_embedder(vectors, config.lowercase),
                           config, dev);
}

TaggerModel train_tagger_with(const std::vector<TaggedSequence>& train,
                              const TokenEmbedder& embed,
                              const TaggerConfig& config,
                              const std::vector<TaggedSequence>* dev) {
  config.validate();
  auto embedded = embed_sequences(train, embed, config.max_sequence_length,
                                  config.embedding_dim);
  std::optional<std::vector<EmbeddedSequence>> embedded_dev;
  if (dev) {
    embedded_dev = embed_sequences(*dev, embed, config.max_sequence_length,
                                   config.embedding_dim);
  }
  return train_impl(std::move(embedded), config,
                    embedded_dev ? &*embedded_dev : nullptr);
}

std::vector<double> predict_probabilities_with(const TaggerModel& model,
                                               const std::vector<Token>& tokens,
                                               const TokenEmbedder& embed) {
  std::vector<double> probs(tokens.size(), 0.0);
  if (tokens.empty()) return probs;
  std::vector<Token> head = tokens;
  if (static_cast<int>(head.size()) > model.config.max_sequence_length) {
    head.resize(model.config.max_sequence_length);
  }
  const Eigen::MatrixXd x = embed(head);
  if (x.cols() != model.config.embedding_dim) {
    throw ValidationError("embedding dimension mismatch at prediction");
  }
  const Forward f = run_forward(model, x, false, nullptr);
  for (std::size_t t = 0; t < head.size(); ++t) {
    probs[t] = f.prob[static_cast<int>(t)];
  }
  return probs;
}

std::vector<double> predict_probabilities(const TaggerModel& model,
                                          const std::vector<Token>& tokens,
                                          const WordVectorTable& vectors) {
  return predict_probabilities_with(
      model, tokens, table_embedder(vectors, model.config.lowercase));
}

std::vector<PropagandaSpan> predict_spans_with(const TaggerModel& model,
                                               const Article& article,
                                               const TokenEmbedder& embed) {
  std::vector<PropagandaSpan> spans;
  for (const auto& [line, start] : split_sequences(article)) {
    const auto tokens = tokenize(line, start);
    if (tokens.empty()) continue;
    const auto probs = predict_probabilities_with(model, tokens, embed);
    std::vector<int> labels(tokens.size(), 0);
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      labels[t] = probs[t] > model.config.decision_threshold ? 1 : 0;
    }
    const auto line_spans = decode_spans(article.id, tokens, labels);
    spans.insert(spans.end(), line_spans.begin(), line_spans.end());
  }
  return spans;
}

std::vector<PropagandaSpan> predict_spans(const TaggerModel& model,
                                          const Article& article,
                                          const WordVectorTable& vectors) {
  return predict_spans_with(model, article,
                            table_embedder(vectors, model.config.lowercase));
}

double span_f1_on_sequences(const TaggerModel& model,
                            const std::vector<TaggedSequence>& sequences,
                            const TokenEmbedder& embed) {
  std::vector<PropagandaSpan> gold, pred;
  for (const auto& seq : sequences) {
    const auto g = decode_spans(seq.article_id, seq.tokens, seq.labels);
    gold.insert(gold.end(), g.begin(), g.end());
    const auto probs = predict_probabilities_with(model, seq.tokens, embed);
    std::vector<int> labels(seq.tokens.size(), 0);
    for (std::size_t t = 0; t < seq.tokens.size(); ++t) {
      labels[t] = probs[t] > model.config.decision_threshold ? 1 : 0;
    }
    const auto p = decode_spans(seq.article_id, seq.tokens, labels);
    pred.insert(pred.end(), p.begin(), p.end());
  }
  return score_si(gold, pred).f1;
}

}  // namespace propdet

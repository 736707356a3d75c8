#include "propdet/tc_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "propdet/text.hpp"

namespace propdet {

namespace {

constexpr double kProbFloor = 1e-12;

// Inputs for one instance with static parts precomputed.
struct Prepared {
  int label = -1;                    // class index; -1 when gold absent
  Eigen::MatrixXd token_inputs;      // recurrent path, tokens x input_dim
  Eigen::VectorXd sentence_vector;   // provider path
};

struct RepForward {
  std::optional<LstmTrace> fwd, bwd;
  Eigen::VectorXd rep;
};

struct HeadForward {
  Eigen::VectorXd a;      // dense activation
  Eigen::VectorXd mask;   // dropout mask
  Eigen::VectorXd probs;  // softmax output
};

bool uses_recurrent(const ClassifierConfig& config) {
  return config.representation == TcRepresentation::recurrent_last_hidden;
}

void check_resources(const ClassifierConfig& config,
                     const TcResources& resources) {
  if (config.representation == TcRepresentation::provider_sentence_vector ||
      (uses_recurrent(config) &&
       config.word_source == TcWordSource::provider_tokens)) {
    if (!resources.provider) {
      throw ValidationError(
          "the configured representation needs an embedding provider");
    }
    if (resources.provider->dim() != config.input_dim) {
      throw ValidationError("provider dimension " +
                            std::to_string(resources.provider->dim()) +
                            " does not match config.input_dim " +
                            std::to_string(config.input_dim));
    }
  }
  if (uses_recurrent(config) && config.word_source == TcWordSource::table) {
    if (!resources.vectors) {
      throw ValidationError(
          "the configured representation needs a word-vector table");
    }
    if (resources.vectors->dim() != config.input_dim) {
      throw ValidationError("word-vector dimension " +
                            std::to_string(resources.vectors->dim()) +
                            " does not match config.input_dim " +
                            std::to_string(config.input_dim));
    }
  }
}

Prepared prepare(const ClassifierConfig& config, const TcResources& resources,
                 const FragmentInstance& inst) {
  Prepared p;
  if (inst.gold) p.label = static_cast<int>(*inst.gold);
  if (uses_recurrent(config)) {
    const auto tokens = tokenize(inst.text, 0);
    if (config.word_source == TcWordSource::table) {
      p.token_inputs = lookup_sequence(*resources.vectors, tokens,
                                       config.lowercase);
    } else if (tokens.empty()) {
      p.token_inputs = Eigen::MatrixXd(0, config.input_dim);
    } else {
      p.token_inputs = resources.provider->embed_tokens(tokens);
    }
  } else {
    p.sentence_vector = resources.provider->embed(inst.text);
  }
  return p;
}

RepForward rep_forward(const ClassifierModel& model, const Prepared& p) {
  RepForward f;
  const auto& config = model.config;
  if (!uses_recurrent(config)) {
    f.rep = p.sentence_vector;
    return f;
  }
  const int T = static_cast<int>(p.token_inputs.rows());
  if (T == 0) {
    // Token-less fragment: the encoder never runs, state stays zero.
    f.rep = Eigen::VectorXd::Zero(config.representation_dim());
    return f;
  }
  f.fwd = lstm_forward(*model.fwd, p.token_inputs, false);
  if (config.bidirectional) {
    f.bwd = lstm_forward(*model.bwd, p.token_inputs, true);
    f.rep.resize(2 * config.hidden_units);
    f.rep.head(config.hidden_units) = f.fwd->h.row(T - 1).transpose();
    f.rep.tail(config.hidden_units) = f.bwd->h.row(0).transpose();
  } else {
    f.rep = f.fwd->h.row(T - 1).transpose();
  }
  return f;
}

HeadForward head_forward(const ClassifierModel& model,
                         const Eigen::VectorXd& rep, bool training, Rng* rng) {
  HeadForward h;
  h.a = (model.dense_w.value * rep + model.dense_b.value.col(0))
            .array()
            .tanh();
  h.mask = training ? dropout_mask(model.config.dense_units,
                                   model.config.dropout_rate, *rng)
                    : Eigen::VectorXd::Ones(model.config.dense_units);
  const Eigen::VectorXd logits =
      model.out_w.value * h.a.cwiseProduct(h.mask) + model.out_b.value.col(0);
  h.probs = softmax(logits);
  return h;
}

// Backward through head and (when recurrent) the encoder for one instance.
void backward_instance(ClassifierModel& model, const Prepared& p,
                       const RepForward& rf, const HeadForward& hf,
                       const Eigen::VectorXd& dlogits) {
  const Eigen::VectorXd ad = hf.a.cwiseProduct(hf.mask);
  model.out_w.grad.noalias() += dlogits * ad.transpose();
  model.out_b.grad.col(0) += dlogits;

  const Eigen::VectorXd dad = model.out_w.value.transpose() * dlogits;
  const Eigen::VectorXd da = dad.cwiseProduct(hf.mask);
  const Eigen::VectorXd dpre =
      da.cwiseProduct((1.0 - hf.a.array().square()).matrix());
  model.dense_w.grad.noalias() += dpre * rf.rep.transpose();
  model.dense_b.grad.col(0) += dpre;

  if (!uses_recurrent(model.config) || !rf.fwd) return;
  const Eigen::VectorXd drep = model.dense_w.value.transpose() * dpre;
  const int T = static_cast<int>(p.token_inputs.rows());
  const int H = model.config.hidden_units;
  Eigen::MatrixXd dh_fwd = Eigen::MatrixXd::Zero(T, H);
  dh_fwd.row(T - 1) = drep.head(H).transpose();
  lstm_backward(*model.fwd, *rf.fwd, dh_fwd);
  if (model.config.bidirectional) {
    Eigen::MatrixXd dh_bwd = Eigen::MatrixXd::Zero(T, H);
    dh_bwd.row(0) = drep.tail(H).transpose();
    lstm_backward(*model.bwd, *rf.bwd, dh_bwd);
  }
}

double accuracy_on(const ClassifierModel& model,
                   const std::vector<Prepared>& prepared) {
  if (prepared.empty()) return 0;
  int correct = 0;
  for (const auto& p : prepared) {
    const RepForward rf = rep_forward(model, p);
    const HeadForward hf = head_forward(model, rf.rep, false, nullptr);
    if (argmax(hf.probs) == p.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(prepared.size());
}

}  // namespace

void ClassifierConfig::validate() const {
  if (n_classes != kTechniqueCount) {
    throw ValidationError("n_classes must be " +
                          std::to_string(kTechniqueCount));
  }
  if (input_dim < 1) throw ValidationError("input_dim must be >= 1");
  if (hidden_units < 1) throw ValidationError("hidden_units must be >= 1");
  if (dense_units < 1) throw ValidationError("dense_units must be >= 1");
  if (dropout_rate < 0 || dropout_rate >= 1) {
    throw ValidationError("dropout_rate must be in [0, 1)");
  }
  if (learning_rate <= 0) throw ValidationError("learning_rate must be > 0");
  if (epochs < 0) throw ValidationError("epochs must be >= 0");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (trees.rounds < 1) throw ValidationError("trees.rounds must be >= 1");
  if (trees.max_depth < 1) throw ValidationError("trees.max_depth must be >= 1");
  if (trees.shrinkage <= 0 || trees.shrinkage > 1) {
    throw ValidationError("trees.shrinkage must be in (0, 1]");
  }
  if (class_weights && static_cast<int>(class_weights->size()) != n_classes) {
    throw ValidationError("class_weights must have exactly " +
                          std::to_string(n_classes) + " entries");
  }
}

std::vector<Param*> ClassifierModel::trainable_params() {
  std::vector<Param*> all;
  if (fwd) {
    all.push_back(&fwd->w);
    all.push_back(&fwd->b);
  }
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

namespace {

std::vector<FragmentInstance> build_instances_impl(
    const std::map<std::string, Article>& articles,
    const std::vector<PropagandaSpan>& spans,
    const std::vector<Technique>* techniques) {
  std::vector<FragmentInstance> instances;
  instances.reserve(spans.size());
  std::map<std::string, std::size_t> lengths;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto& s = spans[i];
    const auto art = articles.find(s.article_id);
    if (art == articles.end()) {
      throw ValidationError("unknown article id \"" + s.article_id +
                            "\" at record " + std::to_string(i + 1));
    }
    auto len = lengths.find(s.article_id);
    if (len == lengths.end()) {
      len = lengths.emplace(s.article_id, codepoint_length(art->second.text))
                .first;
    }
    if (s.end > len->second) {
      throw ValidationError("article " + s.article_id + ": span [" +
                            std::to_string(s.begin) + ", " +
                            std::to_string(s.end) + ") exceeds text length " +
                            std::to_string(len->second) + " at record " +
                            std::to_string(i + 1));
    }
    FragmentInstance inst;
    inst.article_id = s.article_id;
    inst.span = s;
    inst.text = codepoint_slice(art->second.text, s.begin, s.end);
    if (techniques) inst.gold = (*techniques)[i];
    instances.push_back(std::move(inst));
  }
  return instances;
}

}  // namespace

std::vector<FragmentInstance> build_instances(
    const std::map<std::string, Article>& articles,
    const std::vector<TechniqueSpan>& spans) {
  std::vector<PropagandaSpan> plain;
  std::vector<Technique> techniques;
  plain.reserve(spans.size());
  techniques.reserve(spans.size());
  for (const auto& s : spans) {
    plain.push_back(s.span);
    techniques.push_back(s.technique);
  }
  return build_instances_impl(articles, plain, &techniques);
}

std::vector<FragmentInstance> build_instances(
    const std::map<std::string, Article>& articles,
    const std::vector<PropagandaSpan>& spans) {
  return build_instances_impl(articles, spans, nullptr);
}

ClassifierModel init_classifier(const ClassifierConfig& config) {
  config.validate();
  Rng rng(config.seed);
  ClassifierModel model;
  model.config = config;
  model.class_order.assign(all_techniques().begin(), all_techniques().end());
  if (uses_recurrent(config)) {
    model.fwd.emplace();
    model.fwd->init(config.input_dim, config.hidden_units, rng);
    if (config.bidirectional) {
      model.bwd.emplace();
      model.bwd->init(config.input_dim, config.hidden_units, rng);
    }
  }
  const int rep_dim = config.representation_dim();
  model.dense_w.init_uniform(config.dense_units, rep_dim,
                             glorot_limit(rep_dim, config.dense_units), rng);
  model.dense_b.init_zero(config.dense_units, 1);
  model.out_w.init_uniform(config.n_classes, config.dense_units,
                           glorot_limit(config.dense_units, config.n_classes),
                           rng);
  model.out_b.init_zero(config.n_classes, 1);
  return model;
}

ClassifierModel train_classifier(
    const std::vector<FragmentInstance>& instances,
    const TcResources& resources, const ClassifierConfig& config,
    const std::vector<FragmentInstance>* dev) {
  config.validate();
  check_resources(config, resources);
  if (instances.empty()) throw ValidationError("empty training set");
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!instances[i].gold) {
      throw ValidationError("training instance " + std::to_string(i + 1) +
                            " has no gold label");
    }
  }

  ClassifierModel model = init_classifier(config);

  std::vector<Prepared> prepared;
  prepared.reserve(instances.size());
  for (const auto& inst : instances) {
    prepared.push_back(prepare(config, resources, inst));
  }
  std::vector<Prepared> prepared_dev;
  if (dev) {
    for (const auto& inst : *dev) {
      if (!inst.gold) {
        throw ValidationError("dev instance without gold label");
      }
      prepared_dev.push_back(prepare(config, resources, inst));
    }
  }

  if (config.head == TcHead::boosted_trees) {
    Eigen::MatrixXd features(prepared.size(), config.representation_dim());
    std::vector<int> labels(prepared.size());
    for (std::size_t i = 0; i < prepared.size(); ++i) {
      features.row(i) = rep_forward(model, prepared[i]).rep.transpose();
      labels[i] = prepared[i].label;
    }
    std::vector<double> losses;
    model.trees = fit_boosted_trees(features, labels, config.n_classes,
                                    config.trees, &losses);
    for (std::size_t r = 0; r < losses.size(); ++r) {
      model.history.push_back(
          EpochStats{static_cast<int>(r + 1), losses[r], std::nullopt});
    }
    return model;
  }

  // Softmax head, trained end-to-end.
  Rng rng(config.seed + 0x517CC1B727220A95ULL);  // decoupled from init
  AdamOptimizer optimizer(config.learning_rate);
  const auto params = model.trainable_params();
  std::vector<std::size_t> order(prepared.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0;
    for (std::size_t at = 0; at < order.size();
         at += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t batch_end = std::min(
          order.size(), at + static_cast<std::size_t>(config.batch_size));
      const double batch_n = static_cast<double>(batch_end - at);
      for (Param* p : params) p->zero_grad();
      for (std::size_t k = at; k < batch_end; ++k) {
        const Prepared& p = prepared[order[k]];
        const RepForward rf = rep_forward(model, p);
        const HeadForward hf = head_forward(model, rf.rep, true, &rng);
        const double weight =
            config.class_weights ? (*config.class_weights)[p.label] : 1.0;
        const double py = std::max(hf.probs[p.label], kProbFloor);
        epoch_loss -= weight * std::log(py);
        Eigen::VectorXd dlogits = hf.probs;
        dlogits[p.label] -= 1.0;
        dlogits *= weight / batch_n;
        backward_instance(model, p, rf, hf, dlogits);
      }
      optimizer.step(params);
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.loss = epoch_loss / static_cast<double>(prepared.size());
    stats.metric = accuracy_on(model, dev ? prepared_dev : prepared);
    model.history.push_back(stats);
  }
  return model;
}

Eigen::VectorXd fragment_representation(const ClassifierModel& model,
                                        const FragmentInstance& instance,
                                        const TcResources& resources) {
  check_resources(model.config, resources);
  const Prepared p = prepare(model.config, resources, instance);
  return rep_forward(model, p).rep;
}

std::pair<Technique, Eigen::VectorXd> classify(const ClassifierModel& model,
                                               const FragmentInstance& instance,
                                               const TcResources& resources) {
  check_resources(model.config, resources);
  const Prepared p = prepare(model.config, resources, instance);
  const RepForward rf = rep_forward(model, p);
  Eigen::VectorXd probs;
  if (model.config.head == TcHead::boosted_trees) {
    if (!model.trees) {
      throw ValidationError("boosted-trees head has not been trained");
    }
    probs = softmax(model.trees->score(rf.rep));
  } else {
    probs = head_forward(model, rf.rep, false, nullptr).probs;
  }
  const int best = argmax(probs);
  return {model.class_order[static_cast<std::size_t>(best)], probs};
}

std::vector<TechniqueSpan> predict_tc_file(
    const ClassifierModel& model,
    const std::map<std::string, Article>& articles,
    const std::vector<PropagandaSpan>& si_spans,
    const TcResources& resources) {
  const auto instances = build_instances(articles, si_spans);
  std::vector<TechniqueSpan> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) {
    TechniqueSpan t;
    t.span = inst.span;
    t.technique = classify(model, inst, resources).first;
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace propdet

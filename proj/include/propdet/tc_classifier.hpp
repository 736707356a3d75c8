#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "propdet/boosted_trees.hpp"
#include "propdet/embeddings.hpp"
#include "propdet/nn.hpp"
#include "propdet/si_tagger.hpp"

namespace propdet {

enum class TcRepresentation { recurrent_last_hidden, provider_sentence_vector };
enum class TcWordSource { table, provider_tokens };
enum class TcHead { softmax, boosted_trees };

struct ClassifierConfig {
  TcRepresentation representation = TcRepresentation::recurrent_last_hidden;
  // Word-vector source for the recurrent path.
  TcWordSource word_source = TcWordSource::provider_tokens;
  int input_dim = 768;
  int hidden_units = 50;
  int dense_units = 32;
  double dropout_rate = 0.2;
  bool bidirectional = false;
  TcHead head = TcHead::softmax;
  double learning_rate = 0.01;
  int epochs = 40;
  int batch_size = 16;
  bool lowercase = false;
  std::uint64_t seed = 7;
  int n_classes = kTechniqueCount;
  BoostedTreesConfig trees;
  // Optional per-class loss weights (softmax head), 14 entries.
  std::optional<std::vector<double>> class_weights;

  void validate() const;
  int representation_dim() const {
    return representation == TcRepresentation::provider_sentence_vector
               ? input_dim
               : (bidirectional ? 2 * hidden_units : hidden_units);
  }
};

struct FragmentInstance {
  std::string article_id;
  PropagandaSpan span;
  std::string text;  // article.text[begin:end), code-point slice
  std::optional<Technique> gold;
};

// What the configured representation consumes. The caller keeps ownership.
struct TcResources {
  const WordVectorTable* vectors = nullptr;
  EmbeddingProvider* provider = nullptr;
};

// Fragment representation (recurrent last hidden state or provider sentence
// vector) feeding a softmax or boosted-trees head over the 14 classes. The
// boosted-trees head consumes frozen features: with the recurrent
// representation the encoder stays at its seeded initialization.
struct ClassifierModel {
  ClassifierConfig config;
  std::optional<LstmParams> fwd, bwd;      // recurrent representation
  Param dense_w, dense_b, out_w, out_b;    // softmax head
  std::optional<BoostedTreesModel> trees;  // boosted-trees head
  std::vector<Technique> class_order;      // class index -> label
  std::vector<EpochStats> history;

  std::vector<Param*> trainable_params();
};

// One instance per record, duplicates and order preserved; the fragment
// text is the exact code-point slice. Throws ValidationError on unknown
// article ids or out-of-range spans.
std::vector<FragmentInstance> build_instances(
    const std::map<std::string, Article>& articles,
    const std::vector<TechniqueSpan>& spans);
std::vector<FragmentInstance> build_instances(
    const std::map<std::string, Article>& articles,
    const std::vector<PropagandaSpan>& spans);

// Seeded parameters, no training. The encoder draws its weights before any
// head parameters, so the representation for a given seed is identical
// across head choices.
ClassifierModel init_classifier(const ClassifierConfig& config);

// Softmax head: categorical cross-entropy with Adam, trained end-to-end
// through the recurrent encoder. Boosted-trees head: trees fitted on the
// frozen representation. history records per-epoch loss plus dev accuracy
// (train accuracy when no dev set is given); the trees path records
// per-round loss instead.
ClassifierModel train_classifier(
    const std::vector<FragmentInstance>& instances,
    const TcResources& resources, const ClassifierConfig& config,
    const std::vector<FragmentInstance>* dev = nullptr);

// Feature vector handed to the head for this instance.
Eigen::VectorXd fragment_representation(const ClassifierModel& model,
                                        const FragmentInstance& instance,
                                        const TcResources& resources);

// Predicted label and the length-14 probability vector (sums to 1; ties
// resolve to the lowest class index).
std::pair<Technique, Eigen::VectorXd> classify(const ClassifierModel& model,
                                               const FragmentInstance& instance,
                                               const TcResources& resources);

// One TechniqueSpan per input span, same order, offsets copied verbatim.
std::vector<TechniqueSpan> predict_tc_file(
    const ClassifierModel& model,
    const std::map<std::string, Article>& articles,
    const std::vector<PropagandaSpan>& si_spans, const TcResources& resources);

}  // namespace propdet

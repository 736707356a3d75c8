#include "commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>

#include "propdet/fixture.hpp"
#include "propdet/metrics.hpp"
#include "propdet/model_io.hpp"
#include "propdet/plot.hpp"

namespace propdet::cli {

namespace {

namespace fs = std::filesystem;

WordVectorTable load_vectors_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open word-vector file " + path);
  try {
    return WordVectorTable::load(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

fs::path label_path(const fs::path& dir, const std::string& id,
                    const char* suffix) {
  return dir / ("article" + id + suffix);
}

struct SiData {
  std::map<std::string, Article> articles;
  std::vector<PropagandaSpan> gold;
  std::vector<TaggedSequence> sequences;
};

SiData load_si_data(const std::string& dir) {
  SiData data;
  data.articles = load_article_dir(dir);
  if (data.articles.empty()) {
    throw ValidationError("no article{ID}.txt files in " + dir);
  }
  for (const auto& [id, article] : data.articles) {
    const fs::path path = label_path(dir, id, ".task1-SI");
    if (!fs::exists(path)) {
      throw ValidationError("missing label file " + path.string());
    }
    std::ifstream in(path);
    std::vector<std::size_t> lines;
    auto spans = parse_si_labels(in, &lines);
    validate_spans(data.articles, spans, &lines);
    const auto sequences = make_tagged_sequences(article, spans);
    data.sequences.insert(data.sequences.end(), sequences.begin(),
                          sequences.end());
    data.gold.insert(data.gold.end(), spans.begin(), spans.end());
  }
  return data;
}

struct TcData {
  std::map<std::string, Article> articles;
  std::vector<TechniqueSpan> gold;
};

TcData load_tc_data(const std::string& dir) {
  TcData data;
  data.articles = load_article_dir(dir);
  if (data.articles.empty()) {
    throw ValidationError("no article{ID}.txt files in " + dir);
  }
  for (const auto& [id, _] : data.articles) {
    const fs::path path = label_path(dir, id, ".task2-TC");
    if (!fs::exists(path)) {
      throw ValidationError("missing label file " + path.string());
    }
    std::ifstream in(path);
    std::vector<std::size_t> lines;
    auto spans = parse_tc_labels(in, &lines);
    validate_spans(data.articles, spans, &lines);
    data.gold.insert(data.gold.end(), spans.begin(), spans.end());
  }
  return data;
}

// PROPDET_EMBEDDING_ENDPOINT=host:port overrides the configured service.
ServiceEmbeddingProvider::Options apply_endpoint_env(
    ServiceEmbeddingProvider::Options options) {
  const char* env = std::getenv("PROPDET_EMBEDDING_ENDPOINT");
  if (!env || !*env) return options;
  const std::string value = env;
  const auto colon = value.rfind(':');
  if (colon == std::string::npos || colon == 0 ||
      colon + 1 >= value.size()) {
    throw ConfigError(
        "PROPDET_EMBEDDING_ENDPOINT must look like host:port, got \"" +
        value + "\"");
  }
  options.host = value.substr(0, colon);
  try {
    options.port = std::stoi(value.substr(colon + 1));
  } catch (const std::exception&) {
    throw ConfigError("bad port in PROPDET_EMBEDDING_ENDPOINT \"" + value +
                      "\"");
  }
  return options;
}

ProviderSpec make_provider_spec(const AppConfig& config, bool mock, int dim) {
  ProviderSpec spec;
  spec.dim = dim;
  if (mock) {
    spec.type = "mock";
    spec.seed = 0;
  } else {
    spec.type = "service";
    spec.service = apply_endpoint_env(config.service);
    spec.service.dim = dim;
  }
  return spec;
}

std::shared_ptr<EmbeddingProvider> make_provider(const ProviderSpec& spec) {
  std::shared_ptr<EmbeddingProvider> inner;
  if (spec.type == "mock") {
    inner = std::make_shared<HashEmbeddingProvider>(spec.dim, spec.seed);
  } else if (spec.type == "service") {
    inner = std::make_shared<ServiceEmbeddingProvider>(spec.service);
  } else {
    throw ConfigError("model bundle has no embedding provider");
  }
  return std::make_shared<CachingEmbeddingProvider>(std::move(inner));
}

bool tc_needs_provider(const ClassifierConfig& config) {
  return config.representation == TcRepresentation::provider_sentence_vector ||
         config.word_source == TcWordSource::provider_tokens;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

std::string format3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

int gen_fixture(const std::string& out_dir, int articles, int sentences,
                std::uint64_t seed, int vector_dim) {
  if (articles < 1 || sentences < 1 || vector_dim < 1) {
    throw ConfigError("gen-fixture needs positive counts and dimension");
  }
  FixtureOptions options;
  options.articles = articles;
  options.sentences_per_article = sentences;
  options.seed = seed;
  const Fixture fixture = generate_fixture(options);
  write_fixture_dir(fixture, out_dir, vector_dim);
  std::cout << "wrote " << fixture.articles.size() << " articles, "
            << fixture.si_gold.size() << " spans to " << out_dir << "\n";
  return 0;
}

int train_si(const std::string& config_path, const std::string& train_dir,
             const std::string& dev_dir, const std::string& out_dir,
             const std::string& vectors_path) {
  const AppConfig config = load_app_config(config_path);
  const std::string vec_path =
      vectors_path.empty() ? (fs::path(train_dir) / "vectors.txt").string()
                           : vectors_path;
  const WordVectorTable vectors = load_vectors_file(vec_path);
  TaggerConfig tagger_config = config.si;
  tagger_config.embedding_dim = vectors.dim();

  const SiData train = load_si_data(train_dir);
  std::optional<SiData> dev;
  if (!dev_dir.empty()) dev = load_si_data(dev_dir);

  std::cerr << "training span tagger on " << train.sequences.size()
            << " sequences (" << train.articles.size() << " articles)\n";
  const TaggerModel model =
      train_tagger(train.sequences, vectors, tagger_config,
                   dev ? &dev->sequences : nullptr);
  save_si_bundle(out_dir, model, vec_path, ProviderSpec{});
  if (!model.history.empty()) {
    const auto& last = model.history.back();
    std::cout << "final loss " << last.loss;
    if (last.metric) std::cout << ", dev F1 " << format3(*last.metric);
    std::cout << "\n";
  }
  std::cout << "model bundle written to " << out_dir << "\n";
  return 0;
}

int predict_si(const std::string& model_dir, const std::string& articles_dir,
               const std::string& out_file, const std::string& vectors_path) {
  const SiBundle bundle = load_si_bundle(model_dir);
  const auto articles = load_article_dir(articles_dir);
  if (articles.empty()) {
    throw ValidationError("no article{ID}.txt files in " + articles_dir);
  }
  std::vector<PropagandaSpan> spans;
  if (bundle.provider.type != "none") {
    const auto provider = make_provider(bundle.provider);
    const TokenEmbedder embed = provider_token_embedder(*provider);
    for (const auto& [id, article] : articles) {
      const auto s = predict_spans_with(bundle.model, article, embed);
      spans.insert(spans.end(), s.begin(), s.end());
    }
  } else {
    const std::string vec_path =
        vectors_path.empty() ? bundle.vectors_path : vectors_path;
    const WordVectorTable vectors = load_vectors_file(vec_path);
    for (const auto& [id, article] : articles) {
      const auto s = predict_spans(bundle.model, article, vectors);
      spans.insert(spans.end(), s.begin(), s.end());
    }
  }
  write_text_file(out_file, write_predictions(spans));
  std::cout << "wrote " << spans.size() << " spans to " << out_file << "\n";
  return 0;
}

int score_si_cmd(const std::string& gold_path, const std::string& pred_path) {
  const auto gold = load_si_file(gold_path);
  const auto pred = load_si_file(pred_path);
  const ScoreReport report = score_si(gold, pred);
  std::cout << "precision " << format3(report.precision) << "\n"
            << "recall " << format3(report.recall) << "\n"
            << "F1 " << format3(report.f1) << "\n";
  return 0;
}

int train_tc(const std::string& config_path, const std::string& train_dir,
             const std::string& out_dir, const std::string& vectors_path,
             bool mock_embeddings) {
  const AppConfig config = load_app_config(config_path);
  ClassifierConfig tc_config = config.tc;

  const TcData train = load_tc_data(train_dir);
  const auto instances = build_instances(train.articles, train.gold);

  TcResources resources;
  std::shared_ptr<EmbeddingProvider> provider;
  ProviderSpec provider_spec;
  std::optional<WordVectorTable> vectors;
  std::string vec_path;
  if (tc_needs_provider(tc_config)) {
    provider_spec = make_provider_spec(config, mock_embeddings,
                                       tc_config.input_dim);
    provider = make_provider(provider_spec);
    resources.provider = provider.get();
  }
  if (tc_config.representation == TcRepresentation::recurrent_last_hidden &&
      tc_config.word_source == TcWordSource::table) {
    vec_path = vectors_path.empty()
                   ? (fs::path(train_dir) / "vectors.txt").string()
                   : vectors_path;
    vectors = load_vectors_file(vec_path);
    tc_config.input_dim = vectors->dim();
    resources.vectors = &*vectors;
  }

  std::cerr << "training technique classifier on " << instances.size()
            << " fragments\n";
  const ClassifierModel model =
      train_classifier(instances, resources, tc_config);
  save_tc_bundle(out_dir, model, vec_path, provider_spec);
  if (!model.history.empty()) {
    const auto& last = model.history.back();
    std::cout << "final loss " << last.loss;
    if (last.metric) std::cout << ", accuracy " << format3(*last.metric);
    std::cout << "\n";
  }
  std::cout << "model bundle written to " << out_dir << "\n";
  return 0;
}

int predict_tc(const std::string& model_dir, const std::string& articles_dir,
               const std::string& spans_path, const std::string& out_file,
               bool mock_embeddings) {
  TcBundle bundle = load_tc_bundle(model_dir);
  const auto articles = load_article_dir(articles_dir);
  if (articles.empty()) {
    throw ValidationError("no article{ID}.txt files in " + articles_dir);
  }
  const auto spans = load_si_file(spans_path);
  validate_spans(articles, spans);

  TcResources resources;
  std::shared_ptr<EmbeddingProvider> provider;
  std::optional<WordVectorTable> vectors;
  if (tc_needs_provider(bundle.model.config)) {
    ProviderSpec spec = bundle.provider;
    if (mock_embeddings && spec.type != "mock") {
      spec.type = "mock";
      spec.seed = 0;
      spec.dim = bundle.model.config.input_dim;
    }
    provider = make_provider(spec);
    resources.provider = provider.get();
  }
  if (bundle.model.config.representation ==
          TcRepresentation::recurrent_last_hidden &&
      bundle.model.config.word_source == TcWordSource::table) {
    vectors = load_vectors_file(bundle.vectors_path);
    resources.vectors = &*vectors;
  }

  const auto predictions =
      predict_tc_file(bundle.model, articles, spans, resources);
  write_text_file(out_file, write_predictions(predictions));
  std::cout << "wrote " << predictions.size() << " records to " << out_file
            << "\n";
  return 0;
}

int score_tc_cmd(const std::string& gold_path, const std::string& pred_path) {
  const auto gold = load_tc_file(gold_path);
  const auto pred = load_tc_file(pred_path);
  const ScoreReport report = score_tc(gold, pred);
  std::cout << "accuracy " << format3(report.accuracy.value_or(0)) << "\n"
            << "micro-F1 " << format3(report.f1) << "\n"
            << "macro-F1 " << format3(report.macro_f1.value_or(0))
            << " (classes present in gold)\n"
            << "macro-F1 " << format3(report.macro_f1_all.value_or(0))
            << " (all 14 classes)\n";
  for (const auto& [technique, cs] : report.per_class) {
    if (cs.counts.tp + cs.counts.fp + cs.counts.fn == 0) continue;
    std::cout << "  " << technique_name(technique) << " P "
              << format3(cs.precision) << " R " << format3(cs.recall) << " F1 "
              << format3(cs.f1) << "\n";
  }
  return 0;
}

namespace {

const std::vector<std::string> kSiVariants = {
    "glove+lstm", "glove+bilstm", "provider+lstm", "provider+bilstm"};
const std::vector<std::string> kTcVariants = {
    "provider+lstm", "provider+bilstm", "provider-direct",
    "provider+boosted-trees"};

struct CompareRow {
  std::string variant;
  std::uint64_t seed = 0;
  double f1 = 0, precision = 0, recall = 0;
};

void emit_compare(const fs::path& out_dir, const std::string& subtask,
                  const std::vector<CompareRow>& rows) {
  fs::create_directories(out_dir);
  const fs::path csv = out_dir / ("compare-" + subtask + ".csv");
  std::ofstream out(csv);
  out << "variant,seed,f1,precision,recall\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%llu,%.6f,%.6f,%.6f\n",
                  r.variant.c_str(),
                  static_cast<unsigned long long>(r.seed), r.f1, r.precision,
                  r.recall);
    out << buf;
  }
  std::printf("%-24s %6s %8s %10s %8s\n", "variant", "seed", "F1",
              "precision", "recall");
  for (const auto& r : rows) {
    std::printf("%-24s %6llu %8.3f %10.3f %8.3f\n", r.variant.c_str(),
                static_cast<unsigned long long>(r.seed), r.f1, r.precision,
                r.recall);
  }
  std::cout << "comparison table written to " << csv.string() << "\n";
}

}  // namespace

int compare(const std::string& subtask, const std::string& config_path,
            const std::string& train_dir, const std::string& eval_dir,
            const std::string& out_dir, std::vector<std::string> models,
            const std::string& vectors_path, bool mock_embeddings) {
  const AppConfig config = load_app_config(config_path);
  if (subtask != "si" && subtask != "tc") {
    throw ConfigError("subtask must be si or tc");
  }
  const auto& inventory = subtask == "si" ? kSiVariants : kTcVariants;
  if (models.empty()) models = inventory;
  for (const auto& m : models) {
    if (std::find(inventory.begin(), inventory.end(), m) == inventory.end()) {
      throw ConfigError("unknown variant \"" + m + "\" for subtask " +
                        subtask);
    }
  }

  std::vector<CompareRow> rows;

  if (subtask == "si") {
    const SiData train = load_si_data(train_dir);
    const SiData eval = load_si_data(eval_dir);
    const std::string vec_path =
        vectors_path.empty() ? (fs::path(train_dir) / "vectors.txt").string()
                             : vectors_path;
    std::optional<WordVectorTable> vectors;
    std::shared_ptr<EmbeddingProvider> provider;
    for (std::size_t i = 0; i < models.size(); ++i) {
      const std::string& name = models[i];
      TaggerConfig variant = config.si;
      variant.seed = config.si.seed + i;
      variant.bidirectional = name.ends_with("bilstm");
      TokenEmbedder embed;
      if (name.starts_with("glove")) {
        if (!vectors) vectors = load_vectors_file(vec_path);
        variant.embedding_dim = vectors->dim();
        embed = table_embedder(*vectors, variant.lowercase);
      } else {
        if (!provider) {
          provider = make_provider(make_provider_spec(
              config, mock_embeddings, config.tc.input_dim));
        }
        variant.embedding_dim = provider->dim();
        embed = provider_token_embedder(*provider);
      }
      std::cerr << "compare si: training " << name << " (seed "
                << variant.seed << ")\n";
      const TaggerModel model =
          train_tagger_with(train.sequences, embed, variant);
      std::vector<PropagandaSpan> pred;
      for (const auto& [id, article] : eval.articles) {
        const auto s = predict_spans_with(model, article, embed);
        pred.insert(pred.end(), s.begin(), s.end());
      }
      const ScoreReport report = score_si(eval.gold, pred);
      rows.push_back(CompareRow{name, variant.seed, report.f1,
                                report.precision, report.recall});
    }
  } else {
    const TcData train = load_tc_data(train_dir);
    const TcData eval = load_tc_data(eval_dir);
    const auto train_instances = build_instances(train.articles, train.gold);
    std::shared_ptr<EmbeddingProvider> provider = make_provider(
        make_provider_spec(config, mock_embeddings, config.tc.input_dim));
    TcResources resources;
    resources.provider = provider.get();
    for (std::size_t i = 0; i < models.size(); ++i) {
      const std::string& name = models[i];
      ClassifierConfig variant = config.tc;
      variant.seed = config.tc.seed + i;
      variant.input_dim = provider->dim();
      variant.word_source = TcWordSource::provider_tokens;
      variant.head = TcHead::softmax;
      if (name == "provider+lstm" || name == "provider+bilstm") {
        variant.representation = TcRepresentation::recurrent_last_hidden;
        variant.bidirectional = name == "provider+bilstm";
      } else {
        variant.representation = TcRepresentation::provider_sentence_vector;
        variant.bidirectional = false;
        if (name == "provider+boosted-trees") {
          variant.head = TcHead::boosted_trees;
        }
      }
      std::cerr << "compare tc: training " << name << " (seed "
                << variant.seed << ")\n";
      const ClassifierModel model =
          train_classifier(train_instances, resources, variant);
      std::vector<TechniqueSpan> pred;
      for (const auto& gold_span : eval.gold) {
        FragmentInstance inst =
            build_instances(eval.articles,
                            std::vector<PropagandaSpan>{gold_span.span})[0];
        TechniqueSpan out;
        out.span = gold_span.span;
        out.technique = classify(model, inst, resources).first;
        pred.push_back(out);
      }
      const ScoreReport report = score_tc(eval.gold, pred);
      rows.push_back(CompareRow{name, variant.seed, report.f1,
                                report.precision, report.recall});
    }
  }

  emit_compare(out_dir, subtask, rows);
  return 0;
}

int lr_sweep(const std::string& subtask, const std::string& config_path,
             const std::string& train_dir, const std::string& dev_dir,
             const std::string& out_dir, const std::vector<double>& rates,
             int epochs_override, const std::string& vectors_path,
             bool mock_embeddings) {
  const AppConfig config = load_app_config(config_path);
  if (subtask != "si" && subtask != "tc") {
    throw ConfigError("subtask must be si or tc");
  }
  if (rates.size() < 2) {
    throw ConfigError("lr-sweep needs at least 2 rates");
  }
  for (double r : rates) {
    if (r <= 0) throw ConfigError("learning rates must be positive");
  }
  if (dev_dir.empty()) {
    throw ConfigError("lr-sweep needs --dev-dir for per-epoch scores");
  }

  fs::create_directories(out_dir);
  std::vector<PlotSeries> series;
  std::vector<double> finals;
  const std::string metric_name = subtask == "si" ? "dev_f1" : "dev_accuracy";

  std::ofstream csv(fs::path(out_dir) / "sweep.csv");
  csv << "rate,epoch," << metric_name << "\n";
  char buf[96];

  if (subtask == "si") {
    const SiData train = load_si_data(train_dir);
    const SiData dev = load_si_data(dev_dir);
    const std::string vec_path =
        vectors_path.empty() ? (fs::path(train_dir) / "vectors.txt").string()
                             : vectors_path;
    const WordVectorTable vectors = load_vectors_file(vec_path);
    for (double rate : rates) {
      TaggerConfig variant = config.si;
      variant.embedding_dim = vectors.dim();
      variant.learning_rate = rate;
      if (epochs_override > 0) variant.epochs = epochs_override;
      std::cerr << "lr-sweep si: rate " << rate << "\n";
      const TaggerModel model =
          train_tagger(train.sequences, vectors, variant, &dev.sequences);
      PlotSeries s;
      std::snprintf(buf, sizeof(buf), "lr=%g", rate);
      s.label = buf;
      for (const auto& e : model.history) {
        const double metric = e.metric.value_or(0);
        s.points.emplace_back(e.epoch, metric);
        std::snprintf(buf, sizeof(buf), "%g,%d,%.6f\n", rate, e.epoch,
                      metric);
        csv << buf;
      }
      finals.push_back(s.points.empty() ? 0 : s.points.back().second);
      series.push_back(std::move(s));
    }
  } else {
    const TcData train = load_tc_data(train_dir);
    const TcData dev = load_tc_data(dev_dir);
    const auto train_instances = build_instances(train.articles, train.gold);
    const auto dev_instances = build_instances(dev.articles, dev.gold);
    std::shared_ptr<EmbeddingProvider> provider = make_provider(
        make_provider_spec(config, mock_embeddings, config.tc.input_dim));
    TcResources resources;
    resources.provider = provider.get();
    for (double rate : rates) {
      ClassifierConfig variant = config.tc;
      variant.word_source = TcWordSource::provider_tokens;
      variant.input_dim = provider->dim();
      variant.learning_rate = rate;
      if (epochs_override > 0) variant.epochs = epochs_override;
      std::cerr << "lr-sweep tc: rate " << rate << "\n";
      const ClassifierModel model = train_classifier(
          train_instances, resources, variant, &dev_instances);
      PlotSeries s;
      std::snprintf(buf, sizeof(buf), "lr=%g", rate);
      s.label = buf;
      for (const auto& e : model.history) {
        const double metric = e.metric.value_or(0);
        s.points.emplace_back(e.epoch, metric);
        std::snprintf(buf, sizeof(buf), "%g,%d,%.6f\n", rate, e.epoch,
                      metric);
        csv << buf;
      }
      finals.push_back(s.points.empty() ? 0 : s.points.back().second);
      series.push_back(std::move(s));
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < finals.size(); ++i) {
    if (finals[i] > finals[best]) best = i;
  }
  PlotMarker marker;
  marker.x = series[best].points.empty() ? 0 : series[best].points.back().first;
  marker.y = finals[best];
  std::snprintf(buf, sizeof(buf), "best lr=%g", rates[best]);
  marker.label = buf;
  write_line_plot(fs::path(out_dir) / "sweep.svg",
                  "learning-rate sweep (" + subtask + ")", "epoch",
                  metric_name, series, marker);
  std::snprintf(buf, sizeof(buf), "best rate: %g (final %s %.3f)\n",
                rates[best], metric_name.c_str(), finals[best]);
  std::cout << buf;
  std::cout << "sweep outputs written to " << out_dir << "\n";
  return 0;
}

}  // namespace propdet::cli

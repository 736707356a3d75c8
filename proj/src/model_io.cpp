#include "propdet/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace propdet {

namespace {

using nlohmann::json;

void check_keys(const json& section, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!section.is_object()) {
    throw ConfigError("section \"" + where + "\" must be a JSON object");
  }
  for (const auto& [key, _] : section.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key \"" + key + "\" in " + where);
    }
  }
}

template <typename T>
void read_field(const json& section, const char* key, T& out) {
  if (!section.contains(key)) return;
  try {
    out = section.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad value for \"") + key + "\"");
  }
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  j["data"] = std::move(data);
  return j;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw ConfigError("matrix data length does not match rows*cols");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t at = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[at++];
  }
  return m;
}

json param_to_json(const Param& p) { return matrix_to_json(p.value); }

Param param_from_json(const json& j) {
  Param p;
  p.value = matrix_from_json(j);
  p.grad = Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols());
  p.m = p.grad;
  p.v = p.grad;
  return p;
}

json lstm_to_json(const LstmParams& p) {
  json j;
  j["input"] = p.input;
  j["hidden"] = p.hidden;
  j["w"] = param_to_json(p.w);
  j["b"] = param_to_json(p.b);
  return j;
}

LstmParams lstm_from_json(const json& j) {
  LstmParams p;
  p.input = j.at("input").get<int>();
  p.hidden = j.at("hidden").get<int>();
  p.w = param_from_json(j.at("w"));
  p.b = param_from_json(j.at("b"));
  return p;
}

json history_to_json(const std::vector<EpochStats>& history) {
  json out = json::array();
  for (const auto& e : history) {
    json row;
    row["epoch"] = e.epoch;
    row["loss"] = e.loss;
    if (e.metric) row["metric"] = *e.metric; else row["metric"] = nullptr;
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<EpochStats> history_from_json(const json& j) {
  std::vector<EpochStats> history;
  for (const auto& row : j) {
    EpochStats e;
    e.epoch = row.at("epoch").get<int>();
    e.loss = row.at("loss").get<double>();
    if (!row.at("metric").is_null()) e.metric = row.at("metric").get<double>();
    history.push_back(e);
  }
  return history;
}

json provider_to_json(const ProviderSpec& p) {
  json j;
  j["type"] = p.type;
  j["dim"] = p.dim;
  j["seed"] = p.seed;
  if (p.type == "service") {
    j["host"] = p.service.host;
    j["port"] = p.service.port;
    j["timeout_ms"] = p.service.timeout_ms;
    j["path"] = p.service.path;
  }
  return j;
}

ProviderSpec provider_from_json(const json& j) {
  ProviderSpec p;
  p.type = j.at("type").get<std::string>();
  p.dim = j.at("dim").get<int>();
  p.seed = j.at("seed").get<std::uint64_t>();
  if (p.type == "service") {
    p.service.host = j.at("host").get<std::string>();
    p.service.port = j.at("port").get<int>();
    p.service.timeout_ms = j.at("timeout_ms").get<int>();
    p.service.path = j.at("path").get<std::string>();
    p.service.dim = p.dim;
  }
  return p;
}

json trees_to_json(const BoostedTreesModel& model) {
  json j;
  j["n_classes"] = model.n_classes;
  j["feature_dim"] = model.feature_dim;
  json rounds = json::array();
  for (const auto& round : model.rounds) {
    json trees = json::array();
    for (const auto& tree : round) {
      json nodes = json::array();
      for (const auto& n : tree.nodes) {
        nodes.push_back({n.feature, n.threshold, n.value, n.left, n.right});
      }
      trees.push_back(std::move(nodes));
    }
    rounds.push_back(std::move(trees));
  }
  j["rounds"] = std::move(rounds);
  return j;
}

BoostedTreesModel trees_from_json(const json& j) {
  BoostedTreesModel model;
  model.n_classes = j.at("n_classes").get<int>();
  model.feature_dim = j.at("feature_dim").get<int>();
  for (const auto& round : j.at("rounds")) {
    std::vector<RegressionTree> trees;
    for (const auto& tree : round) {
      RegressionTree t;
      for (const auto& n : tree) {
        TreeNode node;
        node.feature = n.at(0).get<int>();
        node.threshold = n.at(1).get<double>();
        node.value = n.at(2).get<double>();
        node.left = n.at(3).get<int>();
        node.right = n.at(4).get<int>();
        t.nodes.push_back(node);
      }
      trees.push_back(std::move(t));
    }
    model.rounds.push_back(std::move(trees));
  }
  return model;
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << doc.dump(1) << '\n';
}

}  // namespace

json tagger_config_to_json(const TaggerConfig& c) {
  json j;
  j["embedding_dim"] = c.embedding_dim;
  j["hidden_units"] = c.hidden_units;
  j["dense_units"] = c.dense_units;
  j["dropout_rate"] = c.dropout_rate;
  j["bidirectional"] = c.bidirectional;
  j["learning_rate"] = c.learning_rate;
  j["optimizer"] = c.optimizer;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["max_sequence_length"] = c.max_sequence_length;
  j["decision_threshold"] = c.decision_threshold;
  j["positive_class_weight"] = c.positive_class_weight;
  j["lowercase"] = c.lowercase;
  j["select_best_dev"] = c.select_best_dev;
  j["seed"] = c.seed;
  return j;
}

TaggerConfig tagger_config_from_json(const json& section) {
  check_keys(section,
             {"embedding_dim", "hidden_units", "dense_units", "dropout_rate",
              "bidirectional", "learning_rate", "optimizer", "epochs",
              "batch_size", "max_sequence_length", "decision_threshold",
              "positive_class_weight", "lowercase", "select_best_dev", "seed"},
             "si config");
  TaggerConfig c;
  read_field(section, "embedding_dim", c.embedding_dim);
  read_field(section, "hidden_units", c.hidden_units);
  read_field(section, "dense_units", c.dense_units);
  read_field(section, "dropout_rate", c.dropout_rate);
  read_field(section, "bidirectional", c.bidirectional);
  read_field(section, "learning_rate", c.learning_rate);
  read_field(section, "optimizer", c.optimizer);
  read_field(section, "epochs", c.epochs);
  read_field(section, "batch_size", c.batch_size);
  read_field(section, "max_sequence_length", c.max_sequence_length);
  read_field(section, "decision_threshold", c.decision_threshold);
  read_field(section, "positive_class_weight", c.positive_class_weight);
  read_field(section, "lowercase", c.lowercase);
  read_field(section, "select_best_dev", c.select_best_dev);
  read_field(section, "seed", c.seed);
  try {
    c.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("si config: ") + e.what());
  }
  return c;
}

namespace {

TcRepresentation representation_from_string(const std::string& s) {
  if (s == "recurrent_last_hidden") return TcRepresentation::recurrent_last_hidden;
  if (s == "provider_sentence_vector") {
    return TcRepresentation::provider_sentence_vector;
  }
  throw ConfigError("unknown representation \"" + s + "\"");
}

std::string representation_to_string(TcRepresentation r) {
  return r == TcRepresentation::recurrent_last_hidden
             ? "recurrent_last_hidden"
             : "provider_sentence_vector";
}

TcWordSource word_source_from_string(const std::string& s) {
  if (s == "table") return TcWordSource::table;
  if (s == "provider") return TcWordSource::provider_tokens;
  throw ConfigError("unknown word_source \"" + s + "\"");
}

std::string word_source_to_string(TcWordSource s) {
  return s == TcWordSource::table ? "table" : "provider";
}

TcHead head_from_string(const std::string& s) {
  if (s == "softmax") return TcHead::softmax;
  if (s == "boosted_trees") return TcHead::boosted_trees;
  throw ConfigError("unknown head \"" + s + "\"");
}

std::string head_to_string(TcHead h) {
  return h == TcHead::softmax ? "softmax" : "boosted_trees";
}

}  // namespace

json classifier_config_to_json(const ClassifierConfig& c) {
  json j;
  j["representation"] = representation_to_string(c.representation);
  j["word_source"] = word_source_to_string(c.word_source);
  j["input_dim"] = c.input_dim;
  j["hidden_units"] = c.hidden_units;
  j["dense_units"] = c.dense_units;
  j["dropout_rate"] = c.dropout_rate;
  j["bidirectional"] = c.bidirectional;
  j["head"] = head_to_string(c.head);
  j["learning_rate"] = c.learning_rate;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["lowercase"] = c.lowercase;
  j["seed"] = c.seed;
  j["n_classes"] = c.n_classes;
  j["trees"] = {{"rounds", c.trees.rounds},
                {"max_depth", c.trees.max_depth},
                {"shrinkage", c.trees.shrinkage},
                {"min_samples_leaf", c.trees.min_samples_leaf}};
  if (c.class_weights) {
    j["class_weights"] = *c.class_weights;
  } else {
    j["class_weights"] = nullptr;
  }
  return j;
}

ClassifierConfig classifier_config_from_json(const json& section) {
  check_keys(section,
             {"representation", "word_source", "input_dim", "hidden_units",
              "dense_units", "dropout_rate", "bidirectional", "head",
              "learning_rate", "epochs", "batch_size", "lowercase", "seed",
              "n_classes", "trees", "class_weights"},
             "tc config");
  ClassifierConfig c;
  if (section.contains("representation")) {
    c.representation = representation_from_string(
        section.at("representation").get<std::string>());
  }
  if (section.contains("word_source")) {
    c.word_source =
        word_source_from_string(section.at("word_source").get<std::string>());
  }
  read_field(section, "input_dim", c.input_dim);
  read_field(section, "hidden_units", c.hidden_units);
  read_field(section, "dense_units", c.dense_units);
  read_field(section, "dropout_rate", c.dropout_rate);
  read_field(section, "bidirectional", c.bidirectional);
  if (section.contains("head")) {
    c.head = head_from_string(section.at("head").get<std::string>());
  }
  read_field(section, "learning_rate", c.learning_rate);
  read_field(section, "epochs", c.epochs);
  read_field(section, "batch_size", c.batch_size);
  read_field(section, "lowercase", c.lowercase);
  read_field(section, "seed", c.seed);
  read_field(section, "n_classes", c.n_classes);
  if (section.contains("trees")) {
    const auto& trees = section.at("trees");
    check_keys(trees, {"rounds", "max_depth", "shrinkage", "min_samples_leaf"},
               "tc config trees");
    read_field(trees, "rounds", c.trees.rounds);
    read_field(trees, "max_depth", c.trees.max_depth);
    read_field(trees, "shrinkage", c.trees.shrinkage);
    read_field(trees, "min_samples_leaf", c.trees.min_samples_leaf);
  }
  if (section.contains("class_weights") &&
      !section.at("class_weights").is_null()) {
    c.class_weights = section.at("class_weights").get<std::vector<double>>();
  }
  try {
    c.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("tc config: ") + e.what());
  }
  return c;
}

AppConfig parse_app_config(const json& doc) {
  check_keys(doc, {"si", "tc", "embedding_service"}, "config");
  AppConfig config;
  if (doc.contains("si")) {
    config.si = tagger_config_from_json(doc.at("si"));
  }
  if (doc.contains("tc")) {
    config.tc = classifier_config_from_json(doc.at("tc"));
  }
  if (doc.contains("embedding_service")) {
    const auto& svc = doc.at("embedding_service");
    check_keys(svc, {"host", "port", "timeout_ms", "dim", "path"},
               "embedding_service");
    read_field(svc, "host", config.service.host);
    read_field(svc, "port", config.service.port);
    read_field(svc, "timeout_ms", config.service.timeout_ms);
    read_field(svc, "dim", config.service.dim);
    read_field(svc, "path", config.service.path);
  }
  return config;
}

AppConfig load_app_config(const std::filesystem::path& path) {
  try {
    return parse_app_config(load_json_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void save_si_bundle(const std::filesystem::path& dir, const TaggerModel& model,
                    const std::string& vectors_path,
                    const ProviderSpec& provider) {
  std::filesystem::create_directories(dir);
  json doc;
  doc["format_version"] = 1;
  doc["kind"] = "si";
  doc["config"] = tagger_config_to_json(model.config);
  json weights;
  weights["fwd"] = lstm_to_json(model.fwd);
  if (model.bwd) weights["bwd"] = lstm_to_json(*model.bwd);
  weights["dense_w"] = param_to_json(model.dense_w);
  weights["dense_b"] = param_to_json(model.dense_b);
  weights["out_w"] = param_to_json(model.out_w);
  weights["out_b"] = param_to_json(model.out_b);
  doc["weights"] = std::move(weights);
  doc["history"] = history_to_json(model.history);
  doc["vectors_path"] = vectors_path;
  doc["provider"] = provider_to_json(provider);
  write_json_file(dir / "model.json", doc);
  write_history_csv(dir / "history.csv", model.history, "dev_f1");
}

SiBundle load_si_bundle(const std::filesystem::path& dir) {
  try {
    const json doc = load_json_file(dir / "model.json");
    if (doc.at("kind").get<std::string>() != "si") {
      throw ConfigError(dir.string() + " does not hold a span-tagger bundle");
    }
    SiBundle bundle;
    bundle.model.config = tagger_config_from_json(doc.at("config"));
    const auto& weights = doc.at("weights");
    bundle.model.fwd = lstm_from_json(weights.at("fwd"));
    if (weights.contains("bwd")) {
      bundle.model.bwd = lstm_from_json(weights.at("bwd"));
    }
    bundle.model.dense_w = param_from_json(weights.at("dense_w"));
    bundle.model.dense_b = param_from_json(weights.at("dense_b"));
    bundle.model.out_w = param_from_json(weights.at("out_w"));
    bundle.model.out_b = param_from_json(weights.at("out_b"));
    bundle.model.history = history_from_json(doc.at("history"));
    bundle.vectors_path = doc.at("vectors_path").get<std::string>();
    bundle.provider = provider_from_json(doc.at("provider"));
    return bundle;
  } catch (const json::exception& e) {
    throw ConfigError("malformed model bundle in " + dir.string() + ": " +
                      e.what());
  }
}

void save_tc_bundle(const std::filesystem::path& dir,
                    const ClassifierModel& model,
                    const std::string& vectors_path,
                    const ProviderSpec& provider) {
  std::filesystem::create_directories(dir);
  json doc;
  doc["format_version"] = 1;
  doc["kind"] = "tc";
  doc["config"] = classifier_config_to_json(model.config);
  json labels = json::array();
  for (Technique t : model.class_order) {
    labels.push_back(std::string(technique_name(t)));
  }
  doc["labels"] = std::move(labels);
  json weights;
  if (model.fwd) weights["fwd"] = lstm_to_json(*model.fwd);
  if (model.bwd) weights["bwd"] = lstm_to_json(*model.bwd);
  weights["dense_w"] = param_to_json(model.dense_w);
  weights["dense_b"] = param_to_json(model.dense_b);
  weights["out_w"] = param_to_json(model.out_w);
  weights["out_b"] = param_to_json(model.out_b);
  doc["weights"] = std::move(weights);
  doc["trees"] = model.trees ? trees_to_json(*model.trees) : json(nullptr);
  doc["history"] = history_to_json(model.history);
  doc["vectors_path"] = vectors_path;
  doc["provider"] = provider_to_json(provider);
  write_json_file(dir / "model.json", doc);
  write_history_csv(dir / "history.csv", model.history,
                    model.config.head == TcHead::boosted_trees ? "metric"
                                                               : "accuracy");
}

TcBundle load_tc_bundle(const std::filesystem::path& dir) {
  try {
    const json doc = load_json_file(dir / "model.json");
    if (doc.at("kind").get<std::string>() != "tc") {
      throw ConfigError(dir.string() + " does not hold a classifier bundle");
    }
    TcBundle bundle;
    bundle.model.config = classifier_config_from_json(doc.at("config"));
    for (const auto& name : doc.at("labels")) {
      const auto technique = parse_technique(name.get<std::string>());
      if (!technique) {
        throw ConfigError("bundle label \"" + name.get<std::string>() +
                          "\" is not in the taxonomy");
      }
      bundle.model.class_order.push_back(*technique);
    }
    if (static_cast<int>(bundle.model.class_order.size()) != kTechniqueCount) {
      throw ConfigError("bundle must map exactly 14 classes");
    }
    const auto& weights = doc.at("weights");
    if (weights.contains("fwd")) {
      bundle.model.fwd = lstm_from_json(weights.at("fwd"));
    }
    if (weights.contains("bwd")) {
      bundle.model.bwd = lstm_from_json(weights.at("bwd"));
    }
    bundle.model.dense_w = param_from_json(weights.at("dense_w"));
    bundle.model.dense_b = param_from_json(weights.at("dense_b"));
    bundle.model.out_w = param_from_json(weights.at("out_w"));
    bundle.model.out_b = param_from_json(weights.at("out_b"));
    if (!doc.at("trees").is_null()) {
      bundle.model.trees = trees_from_json(doc.at("trees"));
    }
    bundle.model.history = history_from_json(doc.at("history"));
    bundle.vectors_path = doc.at("vectors_path").get<std::string>();
    bundle.provider = provider_from_json(doc.at("provider"));
    return bundle;
  } catch (const json::exception& e) {
    throw ConfigError("malformed model bundle in " + dir.string() + ": " +
                      e.what());
  }
}

void write_history_csv(const std::filesystem::path& path,
                       const std::vector<EpochStats>& history,
                       const std::string& metric_name) {
  std::ofstream out(path);
  out << "epoch,loss," << metric_name << '\n';
  char buf[64];
  for (const auto& e : history) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,", e.epoch, e.loss);
    out << buf;
    if (e.metric) {
      std::snprintf(buf, sizeof(buf), "%.17g", *e.metric);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace propdet

#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>

#include "propdet/service_client.hpp"
#include "propdet/si_tagger.hpp"
#include "propdet/tc_classifier.hpp"

namespace propdet {

// Config/bundle schema violations.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// How a saved model obtains its embeddings at prediction time.
struct ProviderSpec {
  std::string type = "none";  // "none" | "mock" | "service"
  int dim = 768;
  std::uint64_t seed = 0;                      // mock
  ServiceEmbeddingProvider::Options service;   // service
};

struct AppConfig {
  TaggerConfig si;
  ClassifierConfig tc;
  ServiceEmbeddingProvider::Options service;
};

// One JSON document with "si", "tc" and "embedding_service" sections.
// Missing sections/keys fall back to defaults; unknown keys are errors.
AppConfig parse_app_config(const nlohmann::json& doc);
AppConfig load_app_config(const std::filesystem::path& path);

nlohmann::json tagger_config_to_json(const TaggerConfig& config);
TaggerConfig tagger_config_from_json(const nlohmann::json& section);
nlohmann::json classifier_config_to_json(const ClassifierConfig& config);
ClassifierConfig classifier_config_from_json(const nlohmann::json& section);

// Model bundles live in a directory holding model.json (format_version,
// config, weights, label mapping, history, embedding source) and
// history.csv.
struct SiBundle {
  TaggerModel model;
  std::string vectors_path;  // table-based models
  ProviderSpec provider;     // provider-based models
};

void save_si_bundle(const std::filesystem::path& dir, const TaggerModel& model,
                    const std::string& vectors_path,
                    const ProviderSpec& provider);
SiBundle load_si_bundle(const std::filesystem::path& dir);

struct TcBundle {
  ClassifierModel model;
  std::string vectors_path;
  ProviderSpec provider;
};

void save_tc_bundle(const std::filesystem::path& dir,
                    const ClassifierModel& model,
                    const std::string& vectors_path,
                    const ProviderSpec& provider);
TcBundle load_tc_bundle(const std::filesystem::path& dir);

void write_history_csv(const std::filesystem::path& path,
                       const std::vector<EpochStats>& history,
                       const std::string& metric_name);

}  // namespace propdet

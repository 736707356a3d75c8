#include "propdet/service_client.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

#include "propdet/text.hpp"

namespace propdet {

namespace {

std::string preview(const std::string& text) {
  const std::size_t len = codepoint_length(text);
  if (len <= 40) return text;
  return codepoint_slice(text, 0, 40) + "...";
}

}  // namespace

Eigen::MatrixXd ServiceEmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) {
  if (texts.empty()) return Eigen::MatrixXd(0, options_.dim);

  const std::string endpoint =
      options_.host + ":" + std::to_string(options_.port);
  const std::string context =
      "; first fragment: \"" + preview(texts.front()) + "\"";

  httplib::Client client(options_.host, options_.port);
  client.set_connection_timeout(options_.timeout_ms / 1000,
                                (options_.timeout_ms % 1000) * 1000);
  client.set_read_timeout(options_.timeout_ms / 1000,
                          (options_.timeout_ms % 1000) * 1000);

  nlohmann::json request;
  request["texts"] = texts;
  const auto res =
      client.Post(options_.path, request.dump(), "application/json");
  if (!res) {
    throw ProviderError("embedding service " + endpoint + " unreachable (" +
                        httplib::to_string(res.error()) + ")" + context);
  }
  if (res->status != 200) {
    throw ProviderError("embedding service " + endpoint + " returned HTTP " +
                        std::to_string(res->status) + context);
  }

  nlohmann::json body;
  try {
    body = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError("embedding service " + endpoint +
                        " sent unparseable JSON (" + e.what() + ")" + context);
  }
  if (!body.contains("vectors") || !body["vectors"].is_array() ||
      body["vectors"].size() != texts.size()) {
    throw ProviderError("embedding service " + endpoint +
                        " response is missing " + std::to_string(texts.size()) +
                        " vectors" + context);
  }

  Eigen::MatrixXd out(texts.size(), options_.dim);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto& row = body["vectors"][i];
    if (!row.is_array() || static_cast<int>(row.size()) != options_.dim) {
      throw ProviderError(
          "embedding service " + endpoint + " returned dimension " +
          std::to_string(row.is_array() ? row.size() : 0) + " (expected " +
          std::to_string(options_.dim) + ") for fragment \"" +
          preview(texts[i]) + "\"");
    }
    for (int k = 0; k < options_.dim; ++k) {
      out(i, k) = row[k].get<double>();
    }
  }
  return out;
}

}  // namespace propdet

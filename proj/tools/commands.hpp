#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace propdet::cli {

int gen_fixture(const std::string& out_dir, int articles, int sentences,
                std::uint64_t seed, int vector_dim);

int train_si(const std::string& config_path, const std::string& train_dir,
             const std::string& dev_dir, const std::string& out_dir,
             const std::string& vectors_path);

int predict_si(const std::string& model_dir, const std::string& articles_dir,
               const std::string& out_file, const std::string& vectors_path);

int score_si_cmd(const std::string& gold_path, const std::string& pred_path);

int train_tc(const std::string& config_path, const std::string& train_dir,
             const std::string& out_dir, const std::string& vectors_path,
             bool mock_embeddings);

int predict_tc(const std::string& model_dir, const std::string& articles_dir,
               const std::string& spans_path, const std::string& out_file,
               bool mock_embeddings);

int score_tc_cmd(const std::string& gold_path, const std::string& pred_path);

int compare(const std::string& subtask, const std::string& config_path,
            const std::string& train_dir, const std::string& eval_dir,
            const std::string& out_dir, std::vector<std::string> models,
            const std::string& vectors_path, bool mock_embeddings);

int lr_sweep(const std::string& subtask, const std::string& config_path,
             const std::string& train_dir, const std::string& dev_dir,
             const std::string& out_dir, const std::vector<double>& rates,
             int epochs_override, const std::string& vectors_path,
             bool mock_embeddings);

}  // namespace propdet::cli

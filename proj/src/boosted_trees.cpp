#include "propdet/boosted_trees.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "propdet/nn.hpp"

namespace propdet {

double RegressionTree::predict(const Eigen::VectorXd& features) const {
  int at = 0;
  while (nodes[at].feature >= 0) {
    at = features[nodes[at].feature] <= nodes[at].threshold ? nodes[at].left
                                                            : nodes[at].right;
  }
  return nodes[at].value;
}

Eigen::VectorXd BoostedTreesModel::score(const Eigen::VectorXd& features) const {
  Eigen::VectorXd logits = Eigen::VectorXd::Zero(n_classes);
  for (const auto& round : rounds) {
    for (int k = 0; k < n_classes; ++k) {
      logits[k] += round[k].predict(features);
    }
  }
  return logits;
}

namespace {

struct TreeBuilder {
  const Eigen::MatrixXd& x;
  const Eigen::VectorXd& residuals;
  const BoostedTreesConfig& config;
  int n_classes;
  std::vector<TreeNode> nodes;

  // Friedman's Newton-step leaf for the softmax objective.
  double leaf_value(const std::vector<int>& samples) const {
    double num = 0, den = 0;
    for (int s : samples) {
      const double r = residuals[s];
      num += r;
      den += std::abs(r) * (1.0 - std::abs(r));
    }
    const double k = static_cast<double>(n_classes);
    const double raw =
        den > 1e-12 ? (k - 1.0) / k * num / den : 0.0;
    return config.shrinkage * raw;
  }

  int build(std::vector<int> samples, int depth) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();

    bool split_found = false;
    int best_feature = -1;
    double best_threshold = 0;
    double best_gain = 0;
    std::vector<int> left, right;

    if (depth < config.max_depth &&
        static_cast<int>(samples.size()) >= 2 * config.min_samples_leaf) {
      double total = 0;
      for (int s : samples) total += residuals[s];
      const double n = static_cast<double>(samples.size());
      const double base = total * total / n;

      std::vector<int> sorted = samples;
      for (int feature = 0; feature < x.cols(); ++feature) {
        std::sort(sorted.begin(), sorted.end(), [&](int a, int b) {
          const double va = x(a, feature), vb = x(b, feature);
          return va != vb ? va < vb : a < b;
        });
        double left_sum = 0;
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
          left_sum += residuals[sorted[i]];
          const double va = x(sorted[i], feature);
          const double vb = x(sorted[i + 1], feature);
          if (va == vb) continue;
          const auto n_left = static_cast<double>(i + 1);
          const auto n_right = n - n_left;
          if (n_left < config.min_samples_leaf ||
              n_right < config.min_samples_leaf) {
            continue;
          }
          const double right_sum = total - left_sum;
          const double gain = left_sum * left_sum / n_left +
                              right_sum * right_sum / n_right - base;
          if (gain > best_gain + 1e-12) {
            best_gain = gain;
            best_feature = feature;
            best_threshold = 0.5 * (va + vb);
            split_found = true;
          }
        }
      }
      if (split_found) {
        for (int s : samples) {
          (x(s, best_feature) <= best_threshold ? left : right).push_back(s);
        }
        // Degenerate numeric midpoints can send everything one way.
        if (left.empty() || right.empty()) split_found = false;
      }
    }

    if (!split_found) {
      nodes[id].value = leaf_value(samples);
      return id;
    }
    nodes[id].feature = best_feature;
    nodes[id].threshold = best_threshold;
    nodes[id].left = build(std::move(left), depth + 1);
    nodes[id].right = build(std::move(right), depth + 1);
    return id;
  }
};

}  // namespace

BoostedTreesModel fit_boosted_trees(const Eigen::MatrixXd& features,
                                    const std::vector<int>& labels,
                                    int n_classes,
                                    const BoostedTreesConfig& config,
                                    std::vector<double>* round_losses) {
  const int n = static_cast<int>(features.rows());
  if (n == 0) throw std::invalid_argument("fit_boosted_trees: no instances");
  if (static_cast<int>(labels.size()) != n) {
    throw std::invalid_argument("fit_boosted_trees: label count mismatch");
  }
  for (int y : labels) {
    if (y < 0 || y >= n_classes) {
      throw std::invalid_argument("fit_boosted_trees: label out of range");
    }
  }

  BoostedTreesModel model;
  model.n_classes = n_classes;
  model.feature_dim = static_cast<int>(features.cols());

  Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(n, n_classes);
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);

  for (int round = 0; round < config.rounds; ++round) {
    Eigen::MatrixXd probs(n, n_classes);
    for (int s = 0; s < n; ++s) {
      probs.row(s) = softmax(logits.row(s).transpose()).transpose();
    }
    std::vector<RegressionTree> trees(n_classes);
    for (int k = 0; k < n_classes; ++k) {
      Eigen::VectorXd residuals(n);
      for (int s = 0; s < n; ++s) {
        residuals[s] = (labels[s] == k ? 1.0 : 0.0) - probs(s, k);
      }
      TreeBuilder builder{features, residuals, config, n_classes, {}};
      builder.build(all, 0);
      trees[k].nodes = std::move(builder.nodes);
      for (int s = 0; s < n; ++s) {
        logits(s, k) += trees[k].predict(features.row(s).transpose());
      }
    }
    model.rounds.push_back(std::move(trees));
    if (round_losses) {
      double loss = 0;
      for (int s = 0; s < n; ++s) {
        const Eigen::VectorXd p = softmax(logits.row(s).transpose());
        loss -= std::log(std::max(p[labels[s]], 1e-12));
      }
      round_losses->push_back(loss / n);
    }
  }
  return model;
}

}  // namespace propdet

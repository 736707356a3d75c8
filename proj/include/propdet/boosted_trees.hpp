#pragma once

#include <Eigen/Dense>
#include <vector>

namespace propdet {

struct BoostedTreesConfig {
  int rounds = 40;
  int max_depth = 3;
  double shrinkage = 0.1;
  int min_samples_leaf = 1;
};

struct TreeNode {
  int feature = -1;      // -1 marks a leaf
  double threshold = 0;  // go left when feature value <= threshold
  double value = 0;      // leaf output (shrinkage already applied)
  int left = -1;
  int right = -1;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double predict(const Eigen::VectorXd& features) const;
};

// Multiclass gradient boosting with a softmax objective: every round fits
// one squared-error regression tree per class to the residuals y_k - p_k,
// with Newton-step leaf values. Fully deterministic (no subsampling).
struct BoostedTreesModel {
  int n_classes = 0;
  int feature_dim = 0;
  std::vector<std::vector<RegressionTree>> rounds;  // rounds[r][class]

  // Per-class logit sums; size n_classes.
  Eigen::VectorXd score(const Eigen::VectorXd& features) const;
};

// features: instances x dims; labels: class indices in [0, n_classes).
// round_losses, when given, receives the mean multiclass deviance after
// every round.
BoostedTreesModel fit_boosted_trees(const Eigen::MatrixXd& features,
                                    const std::vector<int>& labels,
                                    int n_classes,
                                    const BoostedTreesConfig& config,
                                    std::vector<double>* round_losses = nullptr);

}  // namespace propdet

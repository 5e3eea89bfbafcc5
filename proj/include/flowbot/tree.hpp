#pragma once

#include "flowbot/common.hpp"
#include "flowbot/params.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace flowbot {

/// Flattened binary tree node. Leaves have feature < 0. Rows with
/// x[feature] <= threshold go left.
struct TreeNode {
  int feature = -1;
  double threshold = 0;
  int left = -1;
  int right = -1;
  double value = 0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;

  int leaf_index(const Matrix& x, Eigen::Index row) const;
  double predict(const Matrix& x, Eigen::Index row) const { return nodes[leaf_index(x, row)].value; }
  int depth() const;
};

struct TreeOptions {
  int max_depth = -1;     // < 0: unbounded
  int max_features = 0;   // candidate features per split; 0: all
  std::uint64_t seed = kDefaultSeed;
};

/// Gini classification tree over weighted rows (weight 0 excludes a row).
/// Leaf value = weighted fraction of label 1. Splits sit at midpoints between
/// consecutive distinct values; when the sampled features admit no split the
/// remaining features are tried before giving up. `importance`, if given,
/// accumulates the weighted impurity decrease per feature.
Tree fit_classification_tree(const Matrix& x, const Labels& y, std::span<const double> weights,
                             const TreeOptions& opt, std::vector<double>* importance = nullptr);

/// Least-squares regression tree; leaf_of[i] receives the leaf node of row i.
Tree fit_regression_tree(const Matrix& x, const Vector& target, int max_depth, std::vector<int>& leaf_of);

struct Forest {
  std::vector<Tree> trees;
  Vector importances;  // normalized to sum 1 (all zero if no split happened)

  /// Fraction of trees voting 1; a leaf votes 1 when its value >= 0.5.
  Vector vote_fraction(const Matrix& x) const;
};

Forest fit_forest(const Matrix& x, const Labels& y, const ForestParams& p);

struct Booster {
  BoostLoss loss = BoostLoss::exponential;
  double init = 0;
  std::vector<Tree> trees;          // leaf values already include shrinkage
  std::vector<double> train_loss;   // after init, then after each stage

  Vector raw_score(const Matrix& x) const;
  /// Probability of label 1: sigmoid(F) for deviance, sigmoid(2F) for exponential.
  Vector probability(const Matrix& x) const;
};

double boosting_loss(BoostLoss loss, const Vector& raw, const Labels& y);

Booster fit_booster(const Matrix& x, const Labels& y, const BoostParams& p);

}  // namespace flowbot

#pragma once

#include "flowbot/common.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace flowbot {

enum class Family { logreg, svm, rf, gboost, nn };
enum class Penalty { l1, l2, elasticnet };
enum class Kernel { linear, poly, rbf };
enum class BoostLoss { deviance, exponential };

std::string_view to_string(Family f);
std::string_view to_string(Penalty p);
std::string_view to_string(Kernel k);
std::string_view to_string(BoostLoss l);
Family parse_family(std::string_view s);
Penalty parse_penalty(std::string_view s);
Kernel parse_kernel(std::string_view s);
BoostLoss parse_loss(std::string_view s);

/// Per-class sample multipliers, indexed by label.
using ClassWeights = std::array<double, 2>;

// Defaults are the tuned values reported for the CTU-13 scenario-1 study,
// plus solver budgets the study left unspecified.

struct LogRegParams {
  double C = 550.0;
  ClassWeights class_weights{0.044, 0.956};
  int max_iter = 500;
  double tol = 1e-6;
};

struct SvmParams {
  double alpha = 1e-9;
  double l1_ratio = 0.15;
  Penalty penalty = Penalty::l2;
  Kernel kernel = Kernel::linear;
  int degree = 2;
  double gamma = 0.03567;
  int rff_dim = 512;
  int epochs = 20;
  double eta0 = 0.01;
  ClassWeights class_weights{1.0, 1.0};
  std::uint64_t seed = kDefaultSeed;
};

struct ForestParams {
  int n_trees = 100;
  int max_depth = -1;      // < 0: grow until pure
  int max_features = 0;    // 0: floor(sqrt(d))
  bool bootstrap = true;
  std::uint64_t seed = kDefaultSeed;
};

struct BoostParams {
  int n_trees = 100;
  BoostLoss loss = BoostLoss::exponential;
  int max_depth = 4;
  double learning_rate = 0.1;
};

struct NnParams {
  std::vector<int> layers{256, 128};
  int epochs = 10;
  int batch_size = 32;
  double learning_rate = 0.01;
  double momentum = 0.9;
  bool zero_init_output = false;
  std::uint64_t seed = kDefaultSeed;
};

struct HyperParams {
  Family family = Family::rf;
  LogRegParams logreg;
  SvmParams svm;
  ForestParams forest;
  BoostParams boost;
  NnParams nn;

  /// Throws Error when a field of the active family is out of range.
  void validate() const;
};

HyperParams default_params(Family f);

/// Sets one hyperparameter from text, e.g. ("C", "550"), ("layers", "256:128").
/// Throws Error for unknown keys or unparsable values.
void set_param(HyperParams& hp, std::string_view key, std::string_view value);

/// Names accepted by set_param for a family.
std::vector<std::string> param_keys(Family f);

/// "key=value" list of the active family's settings.
std::vector<std::pair<std::string, std::string>> describe_params(const HyperParams& hp);

}  // namespace flowbot

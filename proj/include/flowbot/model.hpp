#pragma once

#include "flowbot/dataset.hpp"
#include "flowbot/linear.hpp"
#include "flowbot/nn.hpp"
#include "flowbot/params.hpp"
#include "flowbot/tree.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace flowbot {

inline constexpr int kModelFormatVersion = 1;

/// Linear SVM on an explicit feature map of the standardized inputs.
struct SvmModel {
  LinearModel linear;
  Kernel kernel = Kernel::linear;
  int degree = 1;
  std::optional<FourierMap> fourier;  // set for Kernel::rbf

  Matrix features(const Matrix& standardized) const;
};

using ModelParameters = std::variant<LinearModel, SvmModel, Forest, Booster, DenseNetwork<double>>;

struct TrainingInfo {
  int iterations = 0;
  bool converged = true;
  std::vector<double> loss_curve;
};

/// Trained model of any family plus everything needed to reproduce its
/// predictions. Immutable once trained; safe to share across threads.
struct ModelArtifact {
  int format_version = kModelFormatVersion;
  HyperParams hyperparams;
  std::vector<std::string> feature_names;
  std::optional<Standardization> standardization;
  ModelParameters parameters;
  TrainingInfo training;

  Family family() const { return hyperparams.family; }
  /// Normalized Gini importances; empty for non-forest families.
  Vector feature_importances() const;
};

ModelArtifact train_logreg(const Dataset& ds, const HyperParams& hp);
ModelArtifact train_linear_svm(const Dataset& ds, const HyperParams& hp);
ModelArtifact train_random_forest(const Dataset& ds, const HyperParams& hp);
ModelArtifact train_gradient_boosting(const Dataset& ds, const HyperParams& hp);
ModelArtifact train_dense_nn(const Dataset& ds, const HyperParams& hp);

/// Dispatches on hp.family.
ModelArtifact train(const Dataset& ds, const HyperParams& hp);

struct Prediction {
  Vector scores;             // in [0, 1]
  std::vector<int> labels;   // score >= 0.5 -> 1
};

/// Throws Error when the row width does not match the model.
Prediction predict(const ModelArtifact& model, const Matrix& rows);

std::string to_json(const ModelArtifact& model);
ModelArtifact model_from_json(const std::string& text);
void save_model(const std::string& path, const ModelArtifact& model);
ModelArtifact load_model(const std::string& path);

}  // namespace flowbot

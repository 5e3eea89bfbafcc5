#pragma once

#include "flowbot/dataset.hpp"
#include "flowbot/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace flowbot {

/// Product-moment correlation. Throws Error on length mismatch, fewer than two
/// points, or a constant input.
template <typename Scalar>
Scalar pearson(std::span<const Scalar> x, std::span<const Scalar> y) {
  if (x.size() != y.size()) throw Error("pearson: length mismatch");
  if (x.size() < 2) throw Error("pearson: need at least two points");
  const auto n = static_cast<Scalar>(x.size());
  Scalar mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  Scalar sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Scalar dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) throw Error("pearson: constant input has undefined correlation");
  const Scalar r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, Scalar(-1), Scalar(1));
}

template <typename Derived1, typename Derived2>
typename Derived1::Scalar pearson(const Eigen::MatrixBase<Derived1>& x, const Eigen::MatrixBase<Derived2>& y) {
  using Scalar = typename Derived1::Scalar;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> a = x, b = y.template cast<Scalar>();
  return pearson<Scalar>(std::span<const Scalar>(a.data(), static_cast<std::size_t>(a.size())),
                         std::span<const Scalar>(b.data(), static_cast<std::size_t>(b.size())));
}

/// Pairwise correlations; rows/columns of constant features are NaN
/// (absent) and the diagonal of every other feature is exactly 1.
Matrix correlation_matrix(const Dataset& ds);

struct FilterConfig {
  double threshold = 0.1;     // keep |r(feature, label)| > threshold
  double redundancy = 0.95;   // drop the weaker of two features with |r| above this
};

struct FilterResult {
  std::vector<std::optional<double>> label_correlation;  // absent for constant features
  std::vector<Eigen::Index> excluded;   // constant features
  std::vector<Eigen::Index> selected;   // stage 1, by |r| descending
  std::vector<Eigen::Index> pruned;     // stage 2, by |r| descending
};

FilterResult filter_select(const Dataset& ds, const FilterConfig& cfg = {});

struct SelectionStep {
  std::vector<Eigen::Index> features;  // subset evaluated at this step
  double f1 = 0;
  std::optional<Eigen::Index> removed;  // absent on the initial step
};

struct SelectionTrace {
  std::string method;
  std::vector<SelectionStep> steps;
};

/// Greedy backward elimination on one fixed split (train_frac of the rows,
/// drawn with `seed`). Each step drops the feature whose removal gives the
/// highest test f1, lowest index on ties, as long as f1 does not decrease.
SelectionTrace backward_elimination(const Dataset& ds, const Trainer& trainer, std::uint64_t seed,
                                    double train_frac = 2.0 / 3.0);

struct PcaResult {
  Matrix components;                 // d x k, orthonormal columns
  Vector explained_variance;         // k eigenvalues of the standardized covariance
  Vector explained_variance_ratio;   // k, descending
  Matrix projected;                  // n x k
  Vector mean, scale;                // standardization used
  Eigen::Index rank = 0;
  double total_variance = 0;
  std::vector<std::string> feature_names;
};

/// PCA of the standardized features (population covariance). When k exceeds
/// the numerical rank a warning is emitted; the trailing components then
/// carry zero variance.
PcaResult pca(const Dataset& ds, Eigen::Index k);

/// Long-format (row, col, value) table for external plotting.
void write_tidy_matrix(std::ostream& out, const Matrix& m, std::span<const std::string> row_names,
                       std::span<const std::string> col_names);

}  // namespace flowbot

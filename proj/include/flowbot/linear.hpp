#pragma once

#include "flowbot/common.hpp"
#include "flowbot/params.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace flowbot {

/// Per-feature affine map to zero mean / unit population variance. Constant
/// columns keep scale 1.
struct Standardization {
  Vector mean;
  Vector scale;

  static Standardization fit(const Matrix& x);
  Matrix apply(const Matrix& x) const;
};

/// All monomials of total degree <= degree in graded lexicographic order,
/// starting with the constant 1: (1, x1, x2, x1^2, x1 x2, x2^2) for d=2.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> map_polynomial(
    const Eigen::MatrixBase<Derived>& x, int degree) {
  using Scalar = typename Derived::Scalar;
  using Out = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (degree < 1) throw Error("map_polynomial: degree must be >= 1");
  const Eigen::Index d = x.cols();
  // Each monomial is a non-decreasing list of feature indices; its column is
  // the column of its prefix times one more feature.
  std::vector<std::vector<Eigen::Index>> terms{{}};
  std::vector<std::size_t> parent{0};
  std::size_t level_begin = 0;
  for (int deg = 1; deg <= degree; ++deg) {
    const std::size_t level_end = terms.size();
    for (std::size_t t = level_begin; t < level_end; ++t) {
      const Eigen::Index start = terms[t].empty() ? 0 : terms[t].back();
      for (Eigen::Index j = start; j < d; ++j) {
        auto next = terms[t];
        next.push_back(j);
        terms.push_back(std::move(next));
        parent.push_back(t);
      }
    }
    level_begin = level_end;
  }
  Out out(x.rows(), static_cast<Eigen::Index>(terms.size()));
  out.col(0).setOnes();
  for (std::size_t t = 1; t < terms.size(); ++t)
    out.col(static_cast<Eigen::Index>(t)) =
        out.col(static_cast<Eigen::Index>(parent[t])).cwiseProduct(x.col(terms[t].back()));
  return out;
}

/// Number of monomials of total degree <= degree in d variables: C(d+degree, degree).
std::size_t polynomial_dimension(std::size_t d, int degree);

/// Random Fourier features for exp(-gamma ||x - y||^2):
/// z(x) = sqrt(2/D) cos(W^T x + b), W ~ Normal(0, 2 gamma), b ~ Uniform[0, 2 pi).
struct FourierMap {
  Matrix weights;  // d x D
  Vector offsets;  // D

  static FourierMap sample(Eigen::Index input_dim, double gamma, int output_dim, std::uint64_t seed);

  template <typename Derived>
  Matrix apply(const Eigen::MatrixBase<Derived>& x) const {
    const double scale = std::sqrt(2.0 / static_cast<double>(offsets.size()));
    Matrix proj = x * weights;
    proj.rowwise() += offsets.transpose();
    return scale * proj.array().cos().matrix();
  }
};

Matrix map_rff(const Matrix& x, double gamma, int output_dim, std::uint64_t seed);

struct LinearModel {
  Vector weights;
  double intercept = 0;

  Vector decision(const Matrix& x) const {
    return (x * weights).array() + intercept;
  }
};

struct FitInfo {
  int iterations = 0;
  bool converged = true;
};

/// Class-weighted cross-entropy + ||w||^2 / (2 C n), full-batch gradient
/// descent with backtracking. Features are used as given.
LinearModel fit_logistic(const Matrix& x, const Labels& y, const LogRegParams& p, FitInfo* info = nullptr);

/// Hinge loss with elastic-net penalty by SGD. Weight step
/// eta0 / (1 + eta0 alpha t); the unpenalized intercept steps by eta0.
/// L1 uses cumulative-penalty truncation, so weights can reach exactly zero.
LinearModel fit_hinge_sgd(const Matrix& x, const Labels& y, const SvmParams& p);

/// Mean (unweighted) hinge loss of a linear model on {0,1} labels.
double hinge_loss(const LinearModel& m, const Matrix& x, const Labels& y);

inline double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace flowbot

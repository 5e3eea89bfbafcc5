#include "flowbot/linear.hpp"

#include <algorithm>
#include <numbers>
#include <numeric>

namespace flowbot {

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void require_both_classes(const Labels& y, const char* who) {
  const auto pos = (y.array() == 1).count();
  if (pos == 0 || pos == y.size()) throw Error(std::string(who) + ": training data must contain both classes");
}

}  // namespace

Standardization Standardization::fit(const Matrix& x) {
  Standardization s;
  const auto n = static_cast<double>(x.rows());
  s.mean = x.colwise().mean().transpose();
  s.scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - s.mean[j]).square().sum() / n;
    s.scale[j] = var > 0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Matrix Standardization::apply(const Matrix& x) const {
  if (x.cols() != mean.size()) throw Error("standardization: column count mismatch");
  return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

std::size_t polynomial_dimension(std::size_t d, int degree) {
  std::size_t out = 1;
  for (int k = 1; k <= degree; ++k) out = out * (d + static_cast<std::size_t>(k)) / static_cast<std::size_t>(k);
  return out;
}

FourierMap FourierMap::sample(Eigen::Index input_dim, double gamma, int output_dim, std::uint64_t seed) {
  if (!(gamma > 0)) throw Error("random Fourier map: gamma must be positive");
  if (output_dim < 2 || output_dim % 2 != 0) throw Error("random Fourier map: dimension must be even and >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 * gamma));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  FourierMap m;
  m.weights.resize(input_dim, output_dim);
  m.offsets.resize(output_dim);
  for (Eigen::Index k = 0; k < output_dim; ++k) {
    for (Eigen::Index j = 0; j < input_dim; ++j) m.weights(j, k) = normal(rng);
    m.offsets[k] = phase(rng);
  }
  return m;
}

Matrix map_rff(const Matrix& x, double gamma, int output_dim, std::uint64_t seed) {
  return FourierMap::sample(x.cols(), gamma, output_dim, seed).apply(x);
}

LinearModel fit_logistic(const Matrix& x, const Labels& y, const LogRegParams& p, FitInfo* info) {
  require_both_classes(y, "logistic regression");
  const Eigen::Index n = x.rows(), d = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double ridge = 1.0 / (p.C * static_cast<double>(n));
  Vector target = y.cast<double>();
  Vector sw(n);
  for (Eigen::Index i = 0; i < n; ++i) sw[i] = p.class_weights[static_cast<std::size_t>(y[i])];

  auto objective = [&](const Vector& w, double b) {
    const Vector z = (x * w).array() + b;
    double loss = 0;
    for (Eigen::Index i = 0; i < n; ++i) loss += sw[i] * (softplus(z[i]) - target[i] * z[i]);
    return loss * inv_n + 0.5 * ridge * w.squaredNorm();
  };

  LinearModel m;
  m.weights = Vector::Zero(d);
  m.intercept = 0;
  double f = objective(m.weights, m.intercept);
  double step = 1.0;
  FitInfo fit{0, false};
  for (int it = 0; it < p.max_iter; ++it) {
    const Vector z = (x * m.weights).array() + m.intercept;
    Vector resid(n);
    for (Eigen::Index i = 0; i < n; ++i) resid[i] = sw[i] * (sigmoid(z[i]) - target[i]);
    const Vector gw = x.transpose() * resid * inv_n + ridge * m.weights;
    const double gb = resid.sum() * inv_n;
    const double gnorm2 = gw.squaredNorm() + gb * gb;
    fit.iterations = it;
    if (std::sqrt(gnorm2) < p.tol) {
      fit.converged = true;
      break;
    }
    step = std::min(step * 2.0, 1e6);
    for (;;) {
      const Vector w_new = m.weights - step * gw;
      const double b_new = m.intercept - step * gb;
      const double f_new = objective(w_new, b_new);
      if (f_new <= f - 1e-4 * step * gnorm2) {
        m.weights = w_new;
        m.intercept = b_new;
        f = f_new;
        break;
      }
      step *= 0.5;
      if (step < 1e-20) {
        // No descent possible at machine precision.
        fit.converged = true;
        break;
      }
    }
    if (fit.converged) break;
    fit.iterations = it + 1;
  }
  if (!fit.converged)
    warn("logistic regression did not reach gradient norm " + format_double(p.tol) + " within " +
         std::to_string(p.max_iter) + " iterations");
  if (info) *info = fit;
  return m;
}

LinearModel fit_hinge_sgd(const Matrix& x, const Labels& y, const SvmParams& p) {
  require_both_classes(y, "linear SVM");
  const Eigen::Index n = x.rows(), d = x.cols();
  double rho = 0;
  switch (p.penalty) {
    case Penalty::l1: rho = 1.0; break;
    case Penalty::l2: rho = 0.0; break;
    case Penalty::elasticnet: rho = p.l1_ratio; break;
  }

  LinearModel m;
  m.weights = Vector::Zero(d);
  m.intercept = 0;
  Vector applied_l1 = Vector::Zero(d);  // penalty actually applied per weight
  double total_l1 = 0;                   // penalty every weight could have received
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(p.seed);
  double t = 1;

  for (int epoch = 0; epoch < p.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index i : order) {
      const double eta = p.eta0 / (1.0 + p.eta0 * p.alpha * t);
      const double sign = y[i] == 1 ? 1.0 : -1.0;
      const double margin = sign * (x.row(i).dot(m.weights) + m.intercept);
      if (rho < 1.0) m.weights *= 1.0 - eta * p.alpha * (1.0 - rho);
      if (margin < 1.0) {
        const double sw = p.class_weights[static_cast<std::size_t>(y[i])];
        m.weights.noalias() += (eta * sw * sign) * x.row(i).transpose();
        m.intercept += p.eta0 * sw * sign;
      }
      if (rho > 0.0) {
        total_l1 += eta * p.alpha * rho;
        for (Eigen::Index j = 0; j < d; ++j) {
          const double before = m.weights[j];
          if (before > 0)
            m.weights[j] = std::max(0.0, before - (total_l1 + applied_l1[j]));
          else if (before < 0)
            m.weights[j] = std::min(0.0, before + (total_l1 - applied_l1[j]));
          applied_l1[j] += m.weights[j] - before;
        }
      }
      t += 1;
    }
  }
  return m;
}

double hinge_loss(const LinearModel& m, const Matrix& x, const Labels& y) {
  const Vector f = m.decision(x);
  double loss = 0;
  for (Eigen::Index i = 0; i < f.size(); ++i) loss += std::max(0.0, 1.0 - (y[i] == 1 ? 1.0 : -1.0) * f[i]);
  return loss / static_cast<double>(f.size());
}

}  // namespace flowbot

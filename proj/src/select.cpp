#include "flowbot/select.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>
#include <numeric>
#include <ostream>

namespace flowbot {

namespace {

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

std::vector<Eigen::Index> all_columns(Eigen::Index d) {
  std::vector<Eigen::Index> cols(static_cast<std::size_t>(d));
  std::iota(cols.begin(), cols.end(), 0);
  return cols;
}

double subset_f1(const Split& parts, std::span<const Eigen::Index> cols, const Trainer& trainer) {
  const Dataset train = select_columns(parts.train, cols);
  const Dataset test = select_columns(parts.test, cols);
  const ModelArtifact model = trainer(train);
  return prf1(test.labels, predict(model, test.features).labels).f1;
}

}  // namespace

Matrix correlation_matrix(const Dataset& ds) {
  if (ds.rows() < 2) throw Error("correlation_matrix: need at least two rows");
  const Eigen::Index d = ds.cols();
  const Matrix centered = ds.features.rowwise() - ds.features.colwise().mean();
  const Vector norms = centered.colwise().norm().transpose();
  Matrix c = centered.transpose() * centered;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      if (norms[i] == 0 || norms[j] == 0)
        c(i, j) = nan();
      else
        c(i, j) = i == j ? 1.0 : std::clamp(c(i, j) / (norms[i] * norms[j]), -1.0, 1.0);
    }
  // Symmetric by construction; copy the upper triangle to remove rounding asymmetry.
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < i; ++j) c(i, j) = c(j, i);
  return c;
}

FilterResult filter_select(const Dataset& ds, const FilterConfig& cfg) {
  if (ds.rows() < 2) throw Error("filter_select: need at least two rows");
  const auto pos = ds.positives();
  if (pos == 0 || pos == static_cast<std::size_t>(ds.rows())) throw Error("filter_select: both classes must be present");

  FilterResult r;
  const Vector label = ds.labels.cast<double>();
  for (Eigen::Index j = 0; j < ds.cols(); ++j) {
    try {
      r.label_correlation.push_back(pearson(ds.features.col(j), label));
    } catch (const Error&) {
      r.label_correlation.push_back(std::nullopt);
      r.excluded.push_back(j);
      warn("feature '" + ds.feature_names[static_cast<std::size_t>(j)] + "' is constant; excluded from selection");
    }
  }
  for (Eigen::Index j = 0; j < ds.cols(); ++j) {
    const auto& rj = r.label_correlation[static_cast<std::size_t>(j)];
    if (rj && std::abs(*rj) > cfg.threshold) r.selected.push_back(j);
  }
  auto strength = [&](Eigen::Index j) { return std::abs(*r.label_correlation[static_cast<std::size_t>(j)]); };
  std::stable_sort(r.selected.begin(), r.selected.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return strength(a) > strength(b); });

  for (Eigen::Index j : r.selected) {
    bool redundant = false;
    for (Eigen::Index k : r.pruned) {
      const double rjk = pearson(ds.features.col(j), ds.features.col(k));
      if (std::abs(rjk) > cfg.redundancy) {
        redundant = true;
        break;
      }
    }
    if (!redundant) r.pruned.push_back(j);
  }
  return r;
}

SelectionTrace backward_elimination(const Dataset& ds, const Trainer& trainer, std::uint64_t seed, double train_frac) {
  SelectionTrace trace;
  trace.method = "backward";
  const Split parts = split(ds, train_frac, seed);
  std::vector<Eigen::Index> current = all_columns(ds.cols());
  double incumbent = 0;
  try {
    incumbent = subset_f1(parts, current, trainer);
  } catch (const std::exception& e) {
    throw Error(std::string("backward elimination, initial step: ") + e.what());
  }
  trace.steps.push_back({current, incumbent, std::nullopt});

  while (current.size() > 1) {
    std::vector<double> scores(current.size());
    const std::size_t step_no = trace.steps.size();
    parallel_for(current.size(), [&](std::size_t k) {
      std::vector<Eigen::Index> candidate = current;
      candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(k));
      try {
        scores[k] = subset_f1(parts, candidate, trainer);
      } catch (const std::exception& e) {
        throw Error("backward elimination, step " + std::to_string(step_no) + " removing feature " +
                    std::to_string(current[k]) + ": " + e.what());
      }
    });
    // current stays sorted, so the first maximum is the lowest feature index.
    std::size_t best = 0;
    for (std::size_t k = 1; k < scores.size(); ++k)
      if (scores[k] > scores[best]) best = k;
    if (scores[best] < incumbent) break;
    const Eigen::Index removed = current[best];
    current.erase(current.begin() + static_cast<std::ptrdiff_t>(best));
    incumbent = scores[best];
    trace.steps.push_back({current, incumbent, removed});
  }
  return trace;
}

PcaResult pca(const Dataset& ds, Eigen::Index k) {
  const Eigen::Index n = ds.rows(), d = ds.cols();
  if (n < 2) throw Error("pca: need at least two rows");
  if (k < 1 || k > d) throw Error("pca: component count must lie in [1, feature count]");

  PcaResult r;
  r.feature_names = ds.feature_names;
  r.mean = ds.features.colwise().mean().transpose();
  Matrix z = ds.features.rowwise() - r.mean.transpose();
  r.scale.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double sd = std::sqrt(z.col(j).squaredNorm() / static_cast<double>(n));
    r.scale[j] = sd > 0 ? sd : 1.0;
    z.col(j) /= r.scale[j];
  }
  const Matrix cov = z.transpose() * z / static_cast<double>(n);
  r.total_variance = cov.trace();

  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success) throw Error("pca: eigendecomposition failed");
  const Vector values = solver.eigenvalues().reverse().cwiseMax(0.0);
  const Matrix vectors = solver.eigenvectors().rowwise().reverse();

  const double top = values.size() ? values[0] : 0.0;
  r.rank = (values.array() > 1e-10 * std::max(top, 1e-300)).count();
  if (k > r.rank)
    warn("pca: requested " + std::to_string(k) + " components but the data has rank " + std::to_string(r.rank) +
         "; trailing components carry no variance");

  r.components = vectors.leftCols(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::Index arg = 0;
    r.components.col(c).cwiseAbs().maxCoeff(&arg);
    if (r.components(arg, c) < 0) r.components.col(c) *= -1.0;
  }
  r.explained_variance = values.head(k);
  r.explained_variance_ratio = r.total_variance > 0 ? Vector(r.explained_variance / r.total_variance)
                                                    : Vector(Vector::Zero(k));
  r.projected = z * r.components;
  return r;
}

void write_tidy_matrix(std::ostream& out, const Matrix& m, std::span<const std::string> row_names,
                       std::span<const std::string> col_names) {
  out << "row,col,value\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << row_names[static_cast<std::size_t>(i)] << ',' << col_names[static_cast<std::size_t>(j)] << ',';
      if (std::isnan(m(i, j)))
        out << "";
      else
        out << format_double(m(i, j));
      out << '\n';
    }
}

}  // namespace flowbot

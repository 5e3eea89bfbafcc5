#include "flowbot/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace flowbot {

Metrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.tn = tn;
  m.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  m.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

double f1_score(double precision, double recall) {
  return precision + recall == 0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

Metrics prf1(std::span<const int> y_true, std::span<const int> y_pred, const std::optional<ClassWeights>& cw) {
  if (y_true.size() != y_pred.size()) throw Error("prf1: label vectors differ in length");
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if ((y_true[i] | y_pred[i]) & ~1) throw Error("prf1: labels must be 0 or 1");
    const bool t = y_true[i] != 0, p = y_pred[i] != 0;
    if (t && p) ++tp;
    else if (!t && p) ++fp;
    else if (t && !p) ++fn;
    else ++tn;
  }
  Metrics m = metrics_from_counts(tp, fp, fn, tn);
  if (cw) {
    const double pos_w = (*cw)[1], neg_w = (*cw)[0];
    const double total = pos_w * static_cast<double>(tp + fn) + neg_w * static_cast<double>(tn + fp);
    const double correct = pos_w * static_cast<double>(tp) + neg_w * static_cast<double>(tn);
    m.weighted_accuracy = total > 0 ? correct / total : 0.0;
  }
  return m;
}

Metrics prf1(const Labels& y_true, std::span<const int> y_pred, const std::optional<ClassWeights>& cw) {
  return prf1(std::span<const int>(y_true.data(), static_cast<std::size_t>(y_true.size())), y_pred, cw);
}

Summary mean_std(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  const auto n = static_cast<double>(values.size());
  for (double v : values) s.mean += v;
  s.mean /= n;
  double ss = 0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / n);
  // Identical runs must report exactly zero spread and their common value.
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; })) {
    s.mean = values[0];
    s.std = 0;
  }
  return s;
}

RepeatedMetrics aggregate(std::vector<Metrics> train_runs, std::vector<Metrics> test_runs) {
  RepeatedMetrics r;
  r.train_runs = std::move(train_runs);
  r.runs = std::move(test_runs);
  auto summarize = [](const std::vector<Metrics>& runs, double Metrics::*field) {
    std::vector<double> v;
    for (const auto& m : runs) v.push_back(m.*field);
    return mean_std(v);
  };
  r.precision = summarize(r.runs, &Metrics::precision);
  r.recall = summarize(r.runs, &Metrics::recall);
  r.f1 = summarize(r.runs, &Metrics::f1);
  r.train_precision = summarize(r.train_runs, &Metrics::precision);
  r.train_recall = summarize(r.train_runs, &Metrics::recall);
  r.train_f1 = summarize(r.train_runs, &Metrics::f1);
  return r;
}

std::vector<Eigen::Index> shuffled_indices(Eigen::Index n, std::uint64_t seed) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  // Explicit Fisher-Yates so the permutation does not depend on the standard library.
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

Split split(const Dataset& ds, double train_frac, std::uint64_t seed) {
  if (!(train_frac > 0 && train_frac < 1)) throw Error("split: train fraction must lie in (0, 1)");
  const Eigen::Index n = ds.rows();
  const auto n_train = static_cast<Eigen::Index>(std::floor(train_frac * static_cast<double>(n) + 1e-9));
  if (n_train <= 0 || n_train >= n) throw Error("split: one side would be empty (n=" + std::to_string(n) + ")");
  const auto idx = shuffled_indices(n, seed);
  std::vector<Eigen::Index> train_rows(idx.begin(), idx.begin() + n_train);
  std::vector<Eigen::Index> test_rows(idx.begin() + n_train, idx.end());
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {select_rows(ds, train_rows), select_rows(ds, test_rows)};
}

Trainer make_trainer(const HyperParams& hp) {
  hp.validate();
  return [hp](const Dataset& ds) { return train(ds, hp); };
}

RepeatedMetrics repeated_eval(const Dataset& ds, const Trainer& trainer, int n_runs, std::uint64_t seed,
                              double train_frac, const TrainTransform& transform) {
  if (n_runs < 1) throw Error("repeated_eval: n_runs must be >= 1");
  std::vector<Metrics> train_runs(static_cast<std::size_t>(n_runs)), test_runs(static_cast<std::size_t>(n_runs));
  parallel_for(static_cast<std::size_t>(n_runs), [&](std::size_t i) {
    const std::uint64_t run_seed = seed + i;
    try {
      auto parts = split(ds, train_frac, run_seed);
      Dataset train_side = transform ? transform(parts.train, run_seed) : std::move(parts.train);
      const ModelArtifact model = trainer(train_side);
      train_runs[i] = prf1(train_side.labels, predict(model, train_side.features).labels);
      test_runs[i] = prf1(parts.test.labels, predict(model, parts.test.features).labels);
    } catch (const std::exception& e) {
      throw Error("run " + std::to_string(i) + ": " + e.what());
    }
  });
  return aggregate(std::move(train_runs), std::move(test_runs));
}

Dataset bootstrap_resample(const Dataset& train, int factor, std::uint64_t seed) {
  if (factor < 1) throw Error("bootstrap: factor must be >= 1");
  if (train.rows() == 0) throw Error("bootstrap: empty training set");
  const auto n = static_cast<std::uint64_t>(train.rows());
  std::mt19937_64 rng(seed ^ 0xB0075724Aull);
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(n * static_cast<std::uint64_t>(factor)));
  for (auto& r : rows) r = static_cast<Eigen::Index>(rng() % n);
  return select_rows(train, rows);
}

RepeatedMetrics bootstrap_eval(const Dataset& ds, const Trainer& trainer, int factor, int n_runs, std::uint64_t seed,
                               double train_frac) {
  return repeated_eval(ds, trainer, n_runs, seed, train_frac,
                       [factor](const Dataset& train, std::uint64_t s) { return bootstrap_resample(train, factor, s); });
}

std::vector<std::pair<HyperParams, std::string>> expand_grid(const HyperParams& base, std::span<const GridAxis> axes) {
  std::vector<std::pair<HyperParams, std::string>> out{{base, ""}};
  for (const auto& axis : axes) {
    if (axis.values.empty()) throw Error("grid axis '" + axis.key + "' has no values");
    std::vector<std::pair<HyperParams, std::string>> next;
    for (const auto& [hp, label] : out)
      for (const auto& v : axis.values) {
        HyperParams p = hp;
        set_param(p, axis.key, v);
        next.emplace_back(p, label + (label.empty() ? "" : ",") + axis.key + "=" + v);
      }
    out = std::move(next);
  }
  return out;
}

SweepResult hyperparam_sweep(const Dataset& ds, std::span<const std::pair<HyperParams, std::string>> grid, int n_runs,
                             std::uint64_t seed, double train_frac) {
  if (grid.empty()) throw Error("hyperparam_sweep: empty grid");
  SweepResult r;
  r.entries.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    auto& e = r.entries[g];
    e.params = grid[g].first;
    e.label = grid[g].second;
    try {
      e.result = repeated_eval(ds, make_trainer(e.params), n_runs, seed, train_frac);
    } catch (const std::exception& ex) {
      e.error = ex.what();
      warn("grid point " + e.label + " failed: " + e.error);
    }
  }
  for (std::size_t g = 0; g < r.entries.size(); ++g) {
    const auto& e = r.entries[g];
    if (!e.result) continue;
    if (!r.best || e.result->f1.mean > r.entries[*r.best].result->f1.mean) r.best = g;
  }
  return r;
}

Metrics cross_scenario_eval(const Dataset& train_ds, const Dataset& test_ds, const Trainer& trainer) {
  if (train_ds.feature_names != test_ds.feature_names)
    throw Error("cross-scenario evaluation: feature names differ between training and test datasets");
  const ModelArtifact model = trainer(train_ds);
  return prf1(test_ds.labels, predict(model, test_ds.features).labels);
}

}  // namespace flowbot

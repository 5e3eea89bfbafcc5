#pragma once

#include "flowbot/dataset.hpp"
#include "flowbot/model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace flowbot {

/// Confusion counts and the rates derived from them; every 0/0 rate is 0.
struct Metrics {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0, recall = 0, f1 = 0;
  std::optional<double> weighted_accuracy;

  std::size_t total() const { return tp + fp + fn + tn; }
};

Metrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn);

/// Binary labels in {0,1}. With class weights, weighted accuracy weights each
/// sample by the weight of its true class.
Metrics prf1(std::span<const int> y_true, std::span<const int> y_pred,
             const std::optional<ClassWeights>& class_weights = std::nullopt);
Metrics prf1(const Labels& y_true, std::span<const int> y_pred,
             const std::optional<ClassWeights>& class_weights = std::nullopt);

/// Harmonic mean with the 0 convention.
double f1_score(double precision, double recall);

struct Summary {
  double mean = 0;
  double std = 0;  // population
};

Summary mean_std(std::span<const double> values);

struct RepeatedMetrics {
  std::vector<Metrics> train_runs;
  std::vector<Metrics> runs;  // test-side metrics, one per run
  Summary precision, recall, f1;
  Summary train_precision, train_recall, train_f1;
};

RepeatedMetrics aggregate(std::vector<Metrics> train_runs, std::vector<Metrics> test_runs);

/// Uniform random partition; the train side gets floor(train_frac * n) rows.
struct Split {
  Dataset train;
  Dataset test;
};

std::vector<Eigen::Index> shuffled_indices(Eigen::Index n, std::uint64_t seed);
Split split(const Dataset& ds, double train_frac, std::uint64_t seed);

using Trainer = std::function<ModelArtifact(const Dataset&)>;

Trainer make_trainer(const HyperParams& hp);

/// Optional transformation of the training side of each split (e.g. bootstrap).
using TrainTransform = std::function<Dataset(const Dataset& train, std::uint64_t seed)>;

/// Run i trains on split(ds, train_frac, seed + i) and scores both sides.
RepeatedMetrics repeated_eval(const Dataset& ds, const Trainer& trainer, int n_runs, std::uint64_t seed,
                              double train_frac = 2.0 / 3.0, const TrainTransform& transform = {});

/// factor * n rows drawn uniformly with replacement.
Dataset bootstrap_resample(const Dataset& train, int factor, std::uint64_t seed);

/// repeated_eval with the training side of every split bootstrapped.
RepeatedMetrics bootstrap_eval(const Dataset& ds, const Trainer& trainer, int factor, int n_runs, std::uint64_t seed,
                               double train_frac = 2.0 / 3.0);

struct SweepEntry {
  HyperParams params;
  std::string label;  // e.g. "C=550,weight_neg=0.044"
  std::optional<RepeatedMetrics> result;
  std::string error;  // set when the grid point failed
};

struct SweepResult {
  std::vector<SweepEntry> entries;
  std::optional<std::size_t> best;  // highest mean test f1; first in grid order on ties
};

/// One axis of a grid: parameter name and candidate values (as text).
struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

/// Cartesian product of the axes applied on top of `base`, first axis slowest.
std::vector<std::pair<HyperParams, std::string>> expand_grid(const HyperParams& base, std::span<const GridAxis> axes);

SweepResult hyperparam_sweep(const Dataset& ds, std::span<const std::pair<HyperParams, std::string>> grid, int n_runs,
                             std::uint64_t seed, double train_frac = 2.0 / 3.0);

/// Train on all of train_ds, score all of test_ds. Feature names must match.
Metrics cross_scenario_eval(const Dataset& train_ds, const Dataset& test_ds, const Trainer& trainer);

}  // namespace flowbot

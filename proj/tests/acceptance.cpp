// Acceptance checks. Prints one PASS/FAIL/SKIP line per criterion and exits
// nonzero when any criterion fails.

#include "flowbot/cli.hpp"
#include "flowbot/evaluation.hpp"
#include "flowbot/nn.hpp"
#include "flowbot/select.hpp"
#include "flowbot/synth.hpp"
#include "flowbot/tree.hpp"
#include "flowbot/windows.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace flowbot;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  bool skipped = false;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> body;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << v;
  return s.str();
}

// 1
Outcome parameter_count() {
  const auto net = DenseNetwork<double>::create(22, NnParams{}.layers, 1);
  const auto trainable = net.trainable_parameter_count(), fixed = net.non_trainable_parameter_count();
  return {trainable == 39681 && fixed == 768,
          "trainable " + std::to_string(trainable) + ", non-trainable " + std::to_string(fixed)};
}

// 2
Outcome metric_oracle() {
  std::size_t mismatches = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    const double positive_rate = std::uniform_real_distribution<double>(0, 1)(rng);
    std::bernoulli_distribution truth(positive_rate), guess(0.5);
    std::vector<int> t(1000), p(1000);
    for (std::size_t i = 0; i < t.size(); ++i) {
      t[i] = truth(rng);
      p[i] = rng() % 4 == 0 ? 1 - t[i] : (guess(rng) ? t[i] : int(guess(rng)));
    }
    const auto c = oracle::confusion(t, p);
    const Metrics m = prf1(t, p);
    const double precision = oracle::ratio(c.tp, c.tp + c.fp), recall = oracle::ratio(c.tp, c.tp + c.fn);
    mismatches += m.tp != c.tp || m.fp != c.fp || m.fn != c.fn || m.tn != c.tn || m.precision != precision ||
                  m.recall != recall || m.f1 != oracle::f1(precision, recall);
  }
  const double f1 = f1_score(1.0, 0.95);
  const bool value_ok = std::abs(f1 - 0.974358974358974) < 1e-12 && std::abs(f1 - 0.975) < 1e-3;
  return {mismatches == 0 && value_ok,
          std::to_string(mismatches) + " mismatches over 100 seeds; f1(1, 0.95) = " + fmt(f1, 12)};
}

// 3
Outcome entropy_properties() {
  std::mt19937_64 rng(3);
  std::size_t violations = 0;
  double worst = 0;
  for (int rep = 0; rep < 10000; ++rep) {
    const int m = 1 + static_cast<int>(rng() % 50);
    std::vector<int> counts(static_cast<std::size_t>(m));
    const int kind = rep % 4;  // 0: uniform, 1: singleton, otherwise random
    const int level = 1 + static_cast<int>(rng() % 100);
    for (auto& c : counts) c = kind == 0 ? level : 1 + static_cast<int>(rng() % 100);
    if (kind == 1) counts.resize(1);
    const double ru = normalized_entropy(counts);
    const bool one = counts.size() == 1;
    const bool uniform = std::all_of(counts.begin(), counts.end(), [&](int c) { return c == counts[0]; });
    const double direct = oracle::relative_uncertainty(counts);
    worst = std::max(worst, std::abs(ru - direct));
    violations += !(ru >= 0 && ru <= 1) || ((ru == 0) != one) ||
                  ((std::abs(ru - 1) <= 1e-12) != (uniform && !one)) || std::abs(ru - direct) > 1e-12;
  }
  std::ostringstream s;
  s << violations << " violations; max |RU - direct| = " << worst;
  return {violations == 0, s.str()};
}

// 4
Outcome window_semantics() {
  std::mt19937_64 rng(4);
  const WindowConfig cfg;
  const Timestamp origin = *parse_timestamp("2011/08/10 09:46:53");
  const std::int64_t width = 120'000'000'000, stride = 60'000'000'000;
  FlowTable table;
  for (int i = 0; i < 10000; ++i) {
    FlowRecord r;
    r.start_time.ns = origin.ns + static_cast<std::int64_t>(rng() % (3 * 3600ull * 1'000'000'000ull));
    // land some flows exactly on window edges
    if (i % 10 == 0) r.start_time.ns = origin.ns + static_cast<std::int64_t>(rng() % 180) * stride;
    if (i == 0) r.start_time = origin;
    r.src_addr = "10.0.0." + std::to_string(i % 7);
    table.records.push_back(r);
  }
  std::size_t mismatches = 0;
  std::map<std::uint64_t, std::vector<std::size_t>> expected;
  for (std::size_t i = 0; i < table.records.size(); ++i) {
    const std::int64_t off = table.records[i].start_time.ns - origin.ns;
    std::vector<std::uint64_t> brute;
    for (std::int64_t k = 0; k * stride <= off; ++k)
      if (off < k * stride + width) brute.push_back(static_cast<std::uint64_t>(k));
    const WindowRange got = windows_containing(table.records[i].start_time, origin, cfg);
    std::vector<std::uint64_t> listed;
    for (std::uint64_t k = got.first; !got.empty() && k <= got.last; ++k) listed.push_back(k);
    mismatches += listed != brute || brute.empty() || brute.size() > 2;
    for (auto k : brute) expected[k].push_back(i);
  }
  const bool grouped = assign_windows(table, cfg) == expected;
  return {mismatches == 0 && grouped,
          std::to_string(mismatches) + " mismatches over 10000 flows; grouping " + (grouped ? "agrees" : "differs")};
}

// 5
Outcome tree_oracle() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 10);
  std::size_t wrong = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 5 + static_cast<int>(rng() % 60);
    Matrix x(n, 1);
    Labels y(n);
    std::vector<double> xs;
    std::vector<int> ys;
    const double cut = u(rng);
    for (int i = 0; i < n; ++i) {
      x(i, 0) = std::round(u(rng) * 10) / 10;
      y[i] = (x(i, 0) > cut) != (rng() % 5 == 0);
      xs.push_back(x(i, 0));
      ys.push_back(y[i]);
    }
    const std::vector<double> w(static_cast<std::size_t>(n), 1.0);
    const Tree t = fit_classification_tree(x, y, w, TreeOptions{1, 0, 1});
    const auto best = oracle::best_midpoints(xs, ys);
    if (best.empty() || std::all_of(ys.begin(), ys.end(), [&](int v) { return v == ys[0]; })) {
      wrong += t.nodes.size() != 1;
      continue;
    }
    wrong += t.nodes.size() != 3 ||
             std::none_of(best.begin(), best.end(), [&](double b) { return std::abs(b - t.nodes[0].threshold) < 1e-12; });
  }
  // consistent data: distinct rows, arbitrary labels
  std::size_t imperfect = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> z;
    Matrix x(400, 6);
    Labels y(400);
    for (Eigen::Index i = 0; i < 400; ++i) {
      for (Eigen::Index j = 0; j < 6; ++j) x(i, j) = z(g);
      y[i] = (x(i, 0) + 0.8 * z(g) > 0) ? 1 : 0;
    }
    const std::vector<double> w(400, 1.0);
    const Tree t = fit_classification_tree(x, y, w, TreeOptions{});
    std::vector<int> truth(y.begin(), y.end()), pred;
    for (Eigen::Index i = 0; i < 400; ++i) pred.push_back(t.predict(x, i) >= 0.5);
    imperfect += prf1(truth, pred).f1 != 1.0;

    ForestParams fp;
    fp.seed = seed;
    const Forest forest = fit_forest(x, y, fp);
    const Vector votes = forest.vote_fraction(x);
    pred.clear();
    for (Eigen::Index i = 0; i < 400; ++i) pred.push_back(votes[i] >= 0.5);
    imperfect += prf1(truth, pred).f1 != 1.0;
  }
  return {wrong == 0 && imperfect == 0, std::to_string(wrong) + " of 200 splits off the oracle; " +
                                            std::to_string(imperfect) + " of 10 fits below training f1 1.0"};
}

// 6
Outcome nn_gradients() {
  using Net = DenseNetwork<double>;
  const std::vector<int> widths{3};
  double worst = 0;
  for (std::uint64_t draw = 0; draw < 20; ++draw) {
    std::mt19937_64 rng(600 + draw);
    std::normal_distribution<double> z;
    auto net = Net::create(4, widths, draw);
    for (auto& t : net.trainable())
      for (Eigen::Index k = 0; k < t.size(); ++k) t[k] = z(rng);
    Net::Mat x(4, 8);
    for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = 2 * z(rng);
    Net::Vec y(8);
    for (Eigen::Index k = 0; k < 8; ++k) y[k] = static_cast<double>(k % 2 == 0 ? rng() % 2 : k % 4 == 1);
    Net grad;
    net.loss_and_gradient(x, y, grad);
    auto analytic = grad.trainable();
    auto params = net.trainable();
    double diff = 0, scale = 0;
    const double h = 1e-6;
    for (std::size_t t = 0; t < params.size(); ++t) {
      for (Eigen::Index k = 0; k < params[t].size(); ++k) {
        const double keep = params[t][k];
        Net unused;
        params[t][k] = keep + h;
        const double up = net.loss_and_gradient(x, y, unused);
        params[t][k] = keep - h;
        const double down = net.loss_and_gradient(x, y, unused);
        params[t][k] = keep;
        const double numeric = (up - down) / (2 * h);
        diff += std::pow(numeric - analytic[t][k], 2);
        scale += std::pow(numeric, 2) + std::pow(analytic[t][k], 2);
      }
    }
    worst = std::max(worst, std::sqrt(diff) / std::sqrt(scale));
  }
  std::ostringstream s;
  s << "max relative error " << worst << " over 20 draws";
  return {worst < 1e-4, s.str()};
}

// 7
Outcome synthetic_end_to_end() {
  const SynthConfig cfg;  // port-scan defaults
  const FlowTable flows = generate_scenario(cfg);
  const Dataset ds = build_dataset(flows);
  const RepeatedMetrics r = repeated_eval(ds, make_trainer(default_params(Family::rf)), 10, 42);
  const double permille = 1000.0 * double(ds.positives()) / double(ds.rows());
  return {r.f1.mean >= 0.95, std::to_string(flows.records.size()) + " flows, " + std::to_string(ds.rows()) +
                                 " rows (" + fmt(permille, 2) + " per mille botnet); mean test f1 " +
                                 fmt(r.f1.mean) + " +/- " + fmt(r.f1.std)};
}

// 8
Outcome bootstrap_direction() {
  SynthConfig cfg;
  cfg.n_background_flows = 3000;
  cfg.n_background_sources = 1000;
  cfg.n_background_destinations = 500;
  cfg.n_botnet_sources = 16;
  cfg.botnet_flow_rate = 2;
  cfg.duration = 1800;
  cfg.bot_active_duration = 60;
  cfg.jitter = 0.1;
  cfg.noise = 0;
  cfg.botnet_behavior = BotProfile::mimic;
  cfg.seed = 42;
  const Dataset ds = build_dataset(generate_scenario(cfg));
  const Trainer rf = make_trainer(default_params(Family::rf));
  const RepeatedMetrics base = repeated_eval(ds, rf, 10, 42);
  const RepeatedMetrics x10 = bootstrap_eval(ds, rf, 10, 10, 42);
  const RepeatedMetrics x30 = bootstrap_eval(ds, rf, 30, 10, 42);
  const bool in_regime = base.recall.mean >= 0.3 && base.recall.mean <= 0.6;
  const bool gain = x10.recall.mean - base.recall.mean >= 0.03;
  const bool f1_kept = x10.f1.mean >= base.f1.mean - 0.02;
  const bool saturates = x30.recall.mean - x10.recall.mean < 0.05;
  return {in_regime && gain && f1_kept && saturates,
          std::to_string(ds.rows()) + " rows, " + std::to_string(ds.positives()) + " botnet; recall/f1 base " +
              fmt(base.recall.mean, 3) + "/" + fmt(base.f1.mean, 3) + ", x10 " + fmt(x10.recall.mean, 3) + "/" +
              fmt(x10.f1.mean, 3) + ", x30 " + fmt(x30.recall.mean, 3) + "/" + fmt(x30.f1.mean, 3)};
}

// 9
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct PipelineOutput {
  std::vector<std::string> files, reports;
  bool ok = true;
};

PipelineOutput run_pipeline(const fs::path& dir, const std::string& threads) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  SynthConfig cfg;
  cfg.n_background_flows = 8000;
  cfg.n_background_sources = 600;
  cfg.duration = 1200;
  std::ofstream(dir / "synth.json") << to_json(cfg);
  const std::string flows = (dir / "flows.binetflow").string(), features = (dir / "features.csv").string();
  const std::vector<std::vector<std::string>> commands{
      {"synth", "--config", (dir / "synth.json").string(), "-o", flows},
      {"extract", flows, "-o", features},
      {"train", features, "--model", "rf", "--n-trees", "40", "-o", (dir / "rf.json").string()},
      {"train", features, "--model", "gboost", "--n-trees", "20", "-o", (dir / "gboost.json").string()},
      {"train", features, "--model", "nn", "--layers", "16:8", "--epochs", "3", "-o", (dir / "nn.json").string()},
      {"eval", features, "--model-file", (dir / "rf.json").string(), "--runs", "3", "--per-run"},
      {"bootstrap-eval", features, "--factor", "2", "--runs", "2", "--n-trees", "20"},
      {"select", features, "--method", "importance", "--n-trees", "20"},
  };
  PipelineOutput result;
  for (auto args : commands) {
    args.insert(args.begin(), {"--threads", threads});
    std::ostringstream out, err;
    if (run(args, out, err) != 0) {
      std::cerr << "command failed: " << args[2] << ": " << err.str();
      result.ok = false;
    }
    result.reports.push_back(out.str());
  }
  for (const char* name : {"flows.binetflow", "features.csv", "rf.json", "gboost.json", "nn.json"})
    result.files.push_back(slurp(dir / name));
  fs::remove_all(dir);
  return result;
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "flowbot_acceptance_determinism";
  const PipelineOutput one = run_pipeline(dir, "1");
  const PipelineOutput many = run_pipeline(dir, "4");
  std::size_t differing = 0;
  for (std::size_t i = 0; i < one.files.size(); ++i) differing += one.files[i] != many.files[i] || one.files[i].empty();
  for (std::size_t i = 0; i < one.reports.size(); ++i) differing += one.reports[i] != many.reports[i];
  return {one.ok && many.ok && differing == 0,
          std::to_string(differing) + " of " + std::to_string(one.files.size() + one.reports.size()) +
              " artifacts and reports differ between 1 and 4 threads"};
}

// 10
Outcome ctu_reproduction() {
  const char* path = std::getenv("CTU13_SCENARIO1");
  if (path == nullptr || *path == '\0') return {true, "CTU13_SCENARIO1 not set", true};
  const Dataset ds = build_dataset(load_scenario(path));
  const RepeatedMetrics r = repeated_eval(ds, make_trainer(default_params(Family::rf)), 1, 42);
  const PcaResult p = pca(ds, 2);
  const double r1 = p.explained_variance_ratio[0], r2 = p.explained_variance_ratio[1];
  const bool scores = r.precision.mean >= 0.97 && r.recall.mean >= 0.90 && r.f1.mean >= 0.94;
  const bool variance = std::abs(r1 - 0.58) <= 0.05 && std::abs(r2 - 0.35) <= 0.05;
  return {scores && variance, std::to_string(ds.rows()) + " rows; P " + fmt(r.precision.mean, 3) + " R " +
                                  fmt(r.recall.mean, 3) + " f1 " + fmt(r.f1.mean, 3) + "; PCA ratios " + fmt(r1, 3) +
                                  ", " + fmt(r2, 3)};
}

// 11
Outcome pca_sanity() {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z;
  Matrix rank1(50, 5);
  Vector direction(5);
  direction << 1.0, -2.0, 0.5, 3.0, -0.25;
  for (Eigen::Index i = 0; i < 50; ++i) {
    const double t = z(rng);
    for (Eigen::Index j = 0; j < 5; ++j) rank1(i, j) = 10.0 * j + direction[j] * t;
  }
  const PcaResult one = pca(make_dataset(rank1, Labels::Zero(50)), 2);
  const bool rank_ok = std::abs(one.explained_variance_ratio[0] - 1.0) < 1e-9 &&
                       std::abs(one.explained_variance_ratio[1]) < 1e-9;

  double worst = 0;
  for (int rep = 0; rep < 20; ++rep) {
    Matrix x(50, 5);
    for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = z(rng);
    x.col(1) += 0.7 * x.col(0);
    x.col(4) *= 5.0;
    Matrix s = x;
    for (Eigen::Index j = 0; j < 5; ++j) {
      std::vector<double> col(s.col(j).data(), s.col(j).data() + 50);
      const double m = oracle::mean(col), sd = oracle::pop_std(col);
      s.col(j) = (s.col(j).array() - m) / sd;
    }
    Vector values;
    Matrix vectors;
    oracle::jacobi_eigen(s.transpose() * s / 50.0, values, vectors);
    const PcaResult got = pca(make_dataset(x, Labels::Zero(50)), 5);
    for (Eigen::Index c = 0; c < 5; ++c) {
      const double sign = got.components.col(c).dot(vectors.col(c)) < 0 ? -1.0 : 1.0;
      worst = std::max(worst, (got.components.col(c) - sign * vectors.col(c)).cwiseAbs().maxCoeff());
      worst = std::max(worst, std::abs(got.explained_variance[c] - values[c]));
    }
  }
  std::ostringstream s;
  s << "rank-1 ratios (" << one.explained_variance_ratio[0] << ", " << one.explained_variance_ratio[1]
    << "); max deviation from oracle " << worst;
  return {rank_ok && worst < 1e-6, s.str()};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "nn parameter count", 1, parameter_count},
      {2, "metric oracle", 5, metric_oracle},
      {3, "entropy properties", 5, entropy_properties},
      {4, "window semantics", 5, window_semantics},
      {5, "tree oracle", 30, tree_oracle},
      {6, "nn gradients", 10, nn_gradients},
      {7, "synthetic end-to-end", 120, synthetic_end_to_end},
      {8, "bootstrap direction", 300, bootstrap_direction},
      {9, "determinism", 60, determinism},
      {10, "ctu reproduction", 900, ctu_reproduction},
      {11, "pca sanity", 5, pca_sanity},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    set_warning_sink([](const std::string&) {});
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = elapsed < c.budget_seconds;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::cout << (o.skipped ? "SKIP" : pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << " ("
              << fmt(elapsed, 2) << " s of " << c.budget_seconds << " s): " << o.detail
              << (in_time ? "" : "; over time budget") << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria met" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}

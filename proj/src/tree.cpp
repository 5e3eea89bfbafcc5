#include "flowbot/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "flowbot/linear.hpp"

namespace flowbot {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Gini: maximizing (P^2 + N^2) / W summed over children minimizes weighted
// child impurity.
struct GiniPolicy {
  const Labels& y;
  std::span<const double> w;

  struct Acc {
    double weight = 0, pos = 0;
    void add(const GiniPolicy& p, std::uint32_t i) {
      weight += p.w[i];
      if (p.y[i] == 1) pos += p.w[i];
    }
    Acc minus(const Acc& o) const { return {weight - o.weight, pos - o.pos}; }
  };
  static double proxy(const Acc& a) {
    const double neg = a.weight - a.pos;
    return (a.pos * a.pos + neg * neg) / a.weight;
  }
  static bool pure(const Acc& a, std::span<const std::uint32_t>) { return a.pos <= 0 || a.pos >= a.weight; }
  static double value(const Acc& a) { return a.pos / a.weight; }
};

struct SquaredErrorPolicy {
  const Vector& target;

  struct Acc {
    double weight = 0, sum = 0;
    void add(const SquaredErrorPolicy& p, std::uint32_t i) {
      weight += 1;
      sum += p.target[i];
    }
    Acc minus(const Acc& o) const { return {weight - o.weight, sum - o.sum}; }
  };
  static double proxy(const Acc& a) { return a.sum * a.sum / a.weight; }
  bool pure(const Acc&, std::span<const std::uint32_t> rows) const {
    for (auto r : rows)
      if (target[r] != target[rows[0]]) return false;
    return true;
  }
  static double value(const Acc& a) { return a.sum / a.weight; }
};

template <typename Policy>
Tree grow_tree(const Matrix& x, std::vector<std::uint32_t> rows, const Policy& policy, const TreeOptions& opt,
               std::vector<double>* importance, std::vector<int>* leaf_of) {
  using Acc = typename Policy::Acc;
  const int d = static_cast<int>(x.cols());
  const int per_split = opt.max_features <= 0 ? d : std::min(opt.max_features, d);
  std::mt19937_64 rng(opt.seed);
  std::vector<int> features(static_cast<std::size_t>(d));
  std::iota(features.begin(), features.end(), 0);
  std::vector<std::pair<double, std::uint32_t>> sorted;
  sorted.reserve(rows.size());

  Tree tree;
  struct Work {
    int node;
    std::size_t begin, end;
    int depth;
  };
  std::vector<Work> stack;
  tree.nodes.emplace_back();
  stack.push_back({0, 0, rows.size(), 0});

  while (!stack.empty()) {
    const Work work = stack.back();
    stack.pop_back();
    const std::span<const std::uint32_t> seg(rows.data() + work.begin, work.end - work.begin);
    Acc total;
    for (auto r : seg) total.add(policy, r);
    tree.nodes[work.node].value = Policy::value(total);

    auto make_leaf = [&] {
      if (leaf_of)
        for (auto r : seg) (*leaf_of)[r] = work.node;
    };
    if (seg.size() < 2 || policy.pure(total, seg) || (opt.max_depth >= 0 && work.depth >= opt.max_depth)) {
      make_leaf();
      continue;
    }

    // Partial Fisher-Yates: the first `tried` entries are this node's random feature order.
    int best_feature = -1;
    double best_threshold = 0, best_score = -std::numeric_limits<double>::infinity();
    int tried = 0;
    for (int k = 0; k < d; ++k) {
      if (tried >= per_split && best_feature >= 0) break;
      std::uniform_int_distribution<int> pick(k, d - 1);
      std::swap(features[static_cast<std::size_t>(k)], features[static_cast<std::size_t>(pick(rng))]);
      const int f = features[static_cast<std::size_t>(k)];
      ++tried;

      sorted.clear();
      for (auto r : seg) sorted.emplace_back(x(r, f), r);
      std::sort(sorted.begin(), sorted.end());
      if (sorted.front().first == sorted.back().first) continue;

      Acc left;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        left.add(policy, sorted[i].second);
        const double lo = sorted[i].first, hi = sorted[i + 1].first;
        if (lo == hi) continue;
        const double score = Policy::proxy(left) + Policy::proxy(total.minus(left));
        if (score > best_score) {
          best_score = score;
          best_feature = f;
          double mid = lo + (hi - lo) * 0.5;
          if (!(mid < hi)) mid = lo;
          best_threshold = mid;
        }
      }
    }
    if (best_feature < 0) {
      make_leaf();
      continue;
    }

    if (importance) (*importance)[static_cast<std::size_t>(best_feature)] += std::max(0.0, best_score - Policy::proxy(total));

    auto* first = rows.data() + work.begin;
    auto* last = rows.data() + work.end;
    auto* mid = std::partition(first, last, [&](std::uint32_t r) { return x(r, best_feature) <= best_threshold; });
    const std::size_t split = work.begin + static_cast<std::size_t>(mid - first);

    const int left_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const int right_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    auto& node = tree.nodes[work.node];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = left_id;
    node.right = right_id;
    stack.push_back({right_id, split, work.end, work.depth + 1});
    stack.push_back({left_id, work.begin, split, work.depth + 1});
  }
  return tree;
}

}  // namespace

int Tree::leaf_index(const Matrix& x, Eigen::Index row) const {
  int i = 0;
  while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    i = x(row, n.feature) <= n.threshold ? n.left : n.right;
  }
  return i;
}

int Tree::depth() const {
  std::vector<int> depth(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, depth[i]);
    if (!nodes[i].is_leaf()) {
      depth[static_cast<std::size_t>(nodes[i].left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(nodes[i].right)] = depth[i] + 1;
    }
  }
  return best;
}

Tree fit_classification_tree(const Matrix& x, const Labels& y, std::span<const double> weights,
                             const TreeOptions& opt, std::vector<double>* importance) {
  if (x.rows() == 0) throw Error("decision tree: empty training set");
  if (static_cast<Eigen::Index>(weights.size()) != x.rows() || y.size() != x.rows())
    throw Error("decision tree: weights/labels must match row count");
  std::vector<std::uint32_t> rows;
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (weights[i] > 0) rows.push_back(static_cast<std::uint32_t>(i));
  if (rows.empty()) throw Error("decision tree: all sample weights are zero");
  if (importance) importance->assign(static_cast<std::size_t>(x.cols()), 0.0);
  return grow_tree(x, std::move(rows), GiniPolicy{y, weights}, opt, importance, nullptr);
}

Tree fit_regression_tree(const Matrix& x, const Vector& target, int max_depth, std::vector<int>& leaf_of) {
  if (x.rows() == 0) throw Error("regression tree: empty training set");
  std::vector<std::uint32_t> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), 0u);
  leaf_of.assign(rows.size(), 0);
  TreeOptions opt;
  opt.max_depth = max_depth;
  return grow_tree(x, std::move(rows), SquaredErrorPolicy{target}, opt, nullptr, &leaf_of);
}

Vector Forest::vote_fraction(const Matrix& x) const {
  Vector votes = Vector::Zero(x.rows());
  for (const auto& t : trees)
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (t.predict(x, i) >= 0.5) votes[i] += 1;
  return votes / static_cast<double>(trees.size());
}

Forest fit_forest(const Matrix& x, const Labels& y, const ForestParams& p) {
  if (x.rows() == 0) throw Error("random forest: empty training set");
  const auto n = static_cast<std::size_t>(x.rows());
  const auto d = static_cast<std::size_t>(x.cols());
  Forest forest;
  forest.trees.resize(static_cast<std::size_t>(p.n_trees));
  std::vector<std::vector<double>> tree_importance(forest.trees.size());

  parallel_for(forest.trees.size(), [&](std::size_t t) {
    const std::uint64_t tree_seed = p.seed + t;
    std::vector<double> weights(n, 1.0);
    if (p.bootstrap) {
      std::fill(weights.begin(), weights.end(), 0.0);
      std::mt19937_64 rng(tree_seed);
      std::uniform_int_distribution<std::size_t> draw(0, n - 1);
      for (std::size_t k = 0; k < n; ++k) weights[draw(rng)] += 1.0;
    }
    TreeOptions opt;
    opt.max_depth = p.max_depth;
    opt.max_features = p.max_features > 0
                           ? p.max_features
                           : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));
    opt.seed = splitmix64(tree_seed);
    forest.trees[t] = fit_classification_tree(x, y, weights, opt, &tree_importance[t]);
  });

  forest.importances = Vector::Zero(static_cast<Eigen::Index>(d));
  for (const auto& imp : tree_importance)
    for (std::size_t j = 0; j < d; ++j) forest.importances[static_cast<Eigen::Index>(j)] += imp[j];
  const double total = forest.importances.sum();
  if (total > 0) forest.importances /= total;
  return forest;
}

// --- gradient boosting -----------------------------------------------------

namespace {

double sample_loss(BoostLoss loss, double raw, int label) {
  if (loss == BoostLoss::deviance) {
    const double z = raw;
    const double sp = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    return sp - (label == 1 ? z : 0.0);
  }
  const double s = label == 1 ? 1.0 : -1.0;
  return std::exp(-s * raw);
}

}  // namespace

double boosting_loss(BoostLoss loss, const Vector& raw, const Labels& y) {
  double total = 0;
  for (Eigen::Index i = 0; i < raw.size(); ++i) total += sample_loss(loss, raw[i], y[i]);
  return total / static_cast<double>(raw.size());
}

Vector Booster::raw_score(const Matrix& x) const {
  Vector f = Vector::Constant(x.rows(), init);
  for (const auto& t : trees)
    for (Eigen::Index i = 0; i < x.rows(); ++i) f[i] += t.predict(x, i);
  return f;
}

Vector Booster::probability(const Matrix& x) const {
  const Vector f = raw_score(x);
  const double k = loss == BoostLoss::deviance ? 1.0 : 2.0;
  return f.unaryExpr([k](double v) { return sigmoid(k * v); });
}

Booster fit_booster(const Matrix& x, const Labels& y, const BoostParams& p) {
  const Eigen::Index n = x.rows();
  const auto pos = (y.array() == 1).count();
  if (pos == 0 || pos == n) throw Error("gradient boosting: training data must contain both classes");

  Booster b;
  b.loss = p.loss;
  const double prior = static_cast<double>(pos) / static_cast<double>(n);
  const double log_odds = std::log(prior / (1.0 - prior));
  b.init = p.loss == BoostLoss::deviance ? log_odds : 0.5 * log_odds;

  Vector raw = Vector::Constant(n, b.init);
  b.train_loss.push_back(boosting_loss(p.loss, raw, y));
  Vector gradient(n);
  std::vector<int> leaf_of;

  for (int stage = 0; stage < p.n_trees; ++stage) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (p.loss == BoostLoss::deviance) {
        gradient[i] = (y[i] == 1 ? 1.0 : 0.0) - sigmoid(raw[i]);
      } else {
        const double s = y[i] == 1 ? 1.0 : -1.0;
        gradient[i] = s * std::exp(-s * raw[i]);
      }
    }
    Tree tree = fit_regression_tree(x, gradient, p.max_depth, leaf_of);

    // Newton step per leaf, halved until the leaf's own loss does not rise.
    std::vector<std::vector<Eigen::Index>> members(tree.nodes.size());
    for (Eigen::Index i = 0; i < n; ++i) members[static_cast<std::size_t>(leaf_of[static_cast<std::size_t>(i)])].push_back(i);
    for (std::size_t leaf = 0; leaf < tree.nodes.size(); ++leaf) {
      if (!tree.nodes[leaf].is_leaf()) continue;
      const auto& rows = members[leaf];
      double num = 0, den = 0;
      for (auto i : rows) {
        if (p.loss == BoostLoss::deviance) {
          const double prob = sigmoid(raw[i]);
          num += gradient[i];
          den += prob * (1.0 - prob);
        } else {
          const double s = y[i] == 1 ? 1.0 : -1.0;
          const double e = std::exp(-s * raw[i]);
          num += s * e;
          den += e;
        }
      }
      double step = den > 1e-150 ? p.learning_rate * num / den : 0.0;
      auto leaf_loss = [&](double delta) {
        double l = 0;
        for (auto i : rows) l += sample_loss(p.loss, raw[i] + delta, y[i]);
        return l;
      };
      const double before = leaf_loss(0.0);
      for (int halving = 0; halving < 60 && step != 0.0 && leaf_loss(step) > before; ++halving) step *= 0.5;
      if (step != 0.0 && leaf_loss(step) > before) step = 0.0;
      tree.nodes[leaf].value = step;
    }
    for (Eigen::Index i = 0; i < n; ++i) raw[i] += tree.nodes[static_cast<std::size_t>(leaf_of[static_cast<std::size_t>(i)])].value;
    b.trees.push_back(std::move(tree));
    b.train_loss.push_back(boosting_loss(p.loss, raw, y));
  }
  return b;
}

}  // namespace flowbot

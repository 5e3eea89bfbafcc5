#include <doctest.h>

#include "flowbot/synth.hpp"
#include "flowbot/windows.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

#include <random>
#include <set>

using namespace flowbot;

namespace {

WindowGroup group_of(const std::vector<FlowRecord>& flows) {
  WindowGroup g;
  g.src_addr = flows.front().src_addr;
  for (const auto& f : flows) g.members.push_back(&f);
  return g;
}

std::vector<std::uint64_t> members(const WindowRange& r) {
  std::vector<std::uint64_t> out;
  for (auto k = r.first; !r.empty() && k <= r.last; ++k) out.push_back(k);
  return out;
}

Timestamp at(double seconds) { return Timestamp{static_cast<std::int64_t>(seconds * 1e9)}; }

}  // namespace

TEST_CASE("window membership follows the interval definition") {
  const WindowConfig cfg;
  CHECK(cfg.width == 120);
  CHECK(cfg.stride == 60);
  CHECK(members(windows_containing(at(150), at(0), cfg)) == std::vector<std::uint64_t>{1, 2});
  CHECK(members(windows_containing(at(0), at(0), cfg)) == std::vector<std::uint64_t>{0});
  CHECK(members(windows_containing(at(59.999), at(0), cfg)) == std::vector<std::uint64_t>{0});
  CHECK(members(windows_containing(at(60), at(0), cfg)) == std::vector<std::uint64_t>{0, 1});
  CHECK(members(windows_containing(at(120), at(0), cfg)) == std::vector<std::uint64_t>{1, 2});
  CHECK(windows_containing(at(-1), at(0), cfg).empty());
  for (double t : {60.0, 61.5, 1000.0, 3599.0}) CHECK(windows_containing(at(t), at(0), cfg).size() == 2);

  WindowConfig wide{300, 60, {}};
  CHECK(windows_containing(at(1000), at(0), wide).size() == 5);
  CHECK_THROWS_AS((WindowConfig{60, 120, {}}.validate()), Error);
  CHECK_THROWS_AS((WindowConfig{60, 0, {}}.validate()), Error);
}

TEST_CASE("assign_windows groups flows by index") {
  FlowTable t;
  t.records = {testing::flow(0), testing::flow(150), testing::flow(30)};
  const auto w = assign_windows(t, {});
  REQUIRE(w.size() == 3);
  CHECK(w.at(0) == std::vector<std::size_t>{0, 2});
  CHECK(w.at(1) == std::vector<std::size_t>{1});
  CHECK(w.at(2) == std::vector<std::size_t>{1});
}

TEST_CASE("normalized entropy") {
  CHECK(normalized_entropy(std::vector<int>{1, 1}) == 1.0);
  CHECK(normalized_entropy(std::vector<int>{4}) == 0.0);
  CHECK(normalized_entropy(std::vector<int>{2, 1, 1}) == doctest::Approx(oracle::relative_uncertainty({2, 1, 1})));
  CHECK(normalized_entropy(std::vector<int>{2, 1, 1}) == doctest::Approx(0.9464).epsilon(1e-4));
  CHECK(normalized_entropy(std::vector<int>{1, 1, 2}) == normalized_entropy(std::vector<int>{2, 1, 1}));
  CHECK(normalized_entropy<float>(std::vector<int>{3, 3, 3}) == 1.0f);
  CHECK_THROWS_AS(normalized_entropy(std::vector<int>{}), Error);
  CHECK_THROWS_AS(normalized_entropy(std::vector<int>{1, 0}), Error);
}

TEST_CASE("singleton group features") {
  FlowRecord r = testing::flow(0);
  r.dur = 2.0;
  r.tot_bytes = 100;
  r.src_bytes = 40;
  const std::vector<FlowRecord> flows{r};
  const FeatureVector f = extract_features(group_of(flows));
  CHECK(f.size() == 22);
  CHECK(f[0] == 1);
  CHECK(f[1] == 1);
  CHECK(f[2] == 1);
  CHECK(f[3] == 1);
  CHECK(f[19] == 0);
  CHECK(f[20] == 0);
  CHECK(f[21] == 0);
  const double dur[] = {2, 2, 0, 2, 2}, tot[] = {100, 100, 0, 100, 100}, src[] = {40, 40, 0, 40, 40};
  for (int k = 0; k < 5; ++k) {
    CHECK(f[4 + k] == dur[k]);
    CHECK(f[9 + k] == tot[k]);
    CHECK(f[14 + k] == src[k]);
  }
}

TEST_CASE("two-flow group features") {
  FlowRecord a = testing::flow(0), b = testing::flow(1);
  a.dport = "53";
  b.dport = "80";
  a.dur = 1.0;
  b.dur = 3.0;
  const std::vector<FlowRecord> flows{a, b};
  const FeatureVector f = extract_features(group_of(flows));
  CHECK(f[0] == 2);
  CHECK(f[3] == 2);
  CHECK(f[21] == 1.0);
  CHECK(f[1] == 1);  // same sport
  CHECK(f[19] == 0);
  const double expected[] = {4, 2, oracle::pop_std({1, 3}), 3, 2};
  for (int k = 0; k < 5; ++k) CHECK(f[4 + k] == doctest::Approx(expected[k]));
}

TEST_CASE("absent categorical values form their own category") {
  FlowRecord a = testing::flow(0), b = testing::flow(1), c = testing::flow(2);
  a.sport.reset();
  b.sport.reset();
  const std::vector<FlowRecord> flows{a, b, c};
  const FeatureVector f = extract_features(group_of(flows));
  CHECK(f[1] == 2);
  CHECK(f[19] == doctest::Approx(oracle::relative_uncertainty({2, 1})));
}

TEST_CASE("labels: any Botnet member marks the group") {
  const std::vector<FlowRecord> mixed{testing::flow(0, "a", "flow=Background-UDP"),
                                      testing::flow(1, "a", "flow=From-Botnet-V42")};
  CHECK(label_group(group_of(mixed)) == 1);
  const std::vector<FlowRecord> normal{testing::flow(0, "a", "flow=Normal-V42"), testing::flow(1, "a", "flow=Normal-X")};
  CHECK(label_group(group_of(normal)) == 0);
  const std::vector<FlowRecord> unlabeled{testing::flow(0, "a", ""), testing::flow(1, "a", "")};
  CHECK(label_group(group_of(unlabeled)) == 0);
  const std::vector<FlowRecord> lower{testing::flow(0, "a", "flow=botnet-lowercase")};
  CHECK(label_group(group_of(lower)) == 0);
}

TEST_CASE("build_dataset row structure") {
  SUBCASE("one flow") {
    FlowTable t;
    t.records = {testing::flow(0)};
    CHECK(build_dataset(t).rows() == 1);
    WindowConfig cfg;
    cfg.origin = Timestamp{t.records[0].start_time.ns - 90'000'000'000};
    CHECK(build_dataset(t, cfg).rows() == 2);
  }
  SUBCASE("flows an hour apart share no row") {
    FlowTable t;
    t.records = {testing::flow(0), testing::flow(3600)};
    const Dataset ds = build_dataset(t);
    CHECK(ds.rows() == 3);
    for (Eigen::Index i = 0; i < ds.rows(); ++i) CHECK(ds.features(i, 0) == 1);
  }
  SUBCASE("empty table is an error") { CHECK_THROWS_AS(build_dataset(FlowTable{}), Error); }
  SUBCASE("ordering by window then address") {
    FlowTable t;
    t.records = {testing::flow(70, "b"), testing::flow(10, "c"), testing::flow(20, "a")};
    const Dataset ds = build_dataset(t);
    std::vector<std::pair<std::uint64_t, std::string>> keys;
    for (auto& k : ds.keys) keys.emplace_back(k.window_index, k.src_addr);
    const std::vector<std::pair<std::uint64_t, std::string>> expected{{0, "a"}, {0, "b"}, {0, "c"}, {1, "b"}};
    CHECK(keys == expected);
    CHECK(ds.feature_names == feature_names());
  }
}

TEST_CASE("dataset rows match an independent count of (window, source) pairs") {
  SynthConfig cfg;
  cfg.n_background_flows = 5000;
  cfg.n_background_sources = 800;
  cfg.duration = 900;
  const FlowTable t = generate_scenario(cfg);
  const Dataset ds = build_dataset(t);
  std::set<std::pair<long long, std::string>> pairs;
  const auto origin = t.records.front().start_time.ns;
  std::map<std::pair<long long, std::string>, int> botnet;
  for (const auto& r : t.records) {
    const long long off = r.start_time.ns - origin;
    for (long long k = 0; k * 60'000'000'000LL <= off; ++k)
      if (off < k * 60'000'000'000LL + 120'000'000'000LL) {
        pairs.insert({k, r.src_addr});
        botnet[{k, r.src_addr}] |= r.label.find("Botnet") != std::string::npos;
      }
  }
  CHECK(static_cast<std::size_t>(ds.rows()) == pairs.size());
  CHECK(static_cast<std::size_t>(ds.rows()) < t.records.size());
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    const auto key = std::make_pair(static_cast<long long>(ds.keys[i].window_index), ds.keys[i].src_addr);
    CHECK(ds.labels[i] == botnet.at(key));
  }
  // feature invariants
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    auto row = ds.features.row(i);
    CHECK(row.allFinite());
    for (int j : {19, 20, 21}) CHECK((row[j] >= 0 && row[j] <= 1));
    for (int j : {1, 2, 3}) CHECK(row[j] <= row[0]);
    for (int b : {4, 9, 14}) {
      CHECK(row[b] >= row[b + 3]);
      CHECK(row[b + 3] >= row[b + 4]);
      CHECK(row[b + 4] >= 0);
    }
  }
}

TEST_CASE("scaling durations scales only the duration features") {
  SynthConfig cfg;
  cfg.n_background_flows = 2000;
  cfg.n_background_sources = 200;
  cfg.duration = 600;
  FlowTable t = generate_scenario(cfg);
  const Dataset base = build_dataset(t);
  for (auto& r : t.records) r.dur *= 3.0;
  const Dataset scaled = build_dataset(t);
  REQUIRE(base.rows() == scaled.rows());
  for (Eigen::Index j = 0; j < 22; ++j) {
    if (j >= 4 && j <= 8)
      CHECK((scaled.features.col(j) - 3.0 * base.features.col(j)).cwiseAbs().maxCoeff() <=
            1e-12 * (1 + base.features.col(j).cwiseAbs().maxCoeff()));
    else
      CHECK(scaled.features.col(j) == base.features.col(j));
  }
}

TEST_CASE("member order does not change the feature row") {
  SynthConfig cfg;
  cfg.n_background_flows = 400;
  cfg.n_background_sources = 3;
  cfg.duration = 120;
  cfg.n_botnet_sources = 0;
  const FlowTable t = generate_scenario(cfg);
  WindowGroup g;
  g.src_addr = "x";
  for (const auto& r : t.records) g.members.push_back(&r);
  const FeatureVector before = extract_features(g);
  std::mt19937 rng(3);
  for (int rep = 0; rep < 5; ++rep) {
    std::shuffle(g.members.begin(), g.members.end(), rng);
    CHECK(extract_features(g) == before);
  }
}

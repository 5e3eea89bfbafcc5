#include <doctest.h>

#include "flowbot/synth.hpp"
#include "flowbot/windows.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

#include <map>
#include <set>
#include <sstream>

using namespace flowbot;

namespace {

SynthConfig small_config() {
  SynthConfig cfg;
  cfg.n_background_flows = 4000;
  cfg.n_background_sources = 500;
  cfg.n_background_destinations = 200;
  cfg.duration = 600;
  return cfg;
}

std::string csv_of(const FlowTable& t) {
  std::ostringstream out;
  write_flows(out, t);
  return out.str();
}

std::size_t botnet_flows(const FlowTable& t) {
  return static_cast<std::size_t>(std::count_if(t.records.begin(), t.records.end(), [](const FlowRecord& r) {
    return r.label.find("Botnet") != std::string::npos;
  }));
}

}  // namespace

TEST_CASE("same seed gives byte-identical output, another seed differs") {
  const SynthConfig cfg = small_config();
  const std::string a = csv_of(generate_scenario(cfg));
  CHECK(a == csv_of(generate_scenario(cfg)));
  SynthConfig other = cfg;
  other.seed = 43;
  CHECK(a != csv_of(generate_scenario(other)));
}

TEST_CASE("flow counts and ordering") {
  for (BotProfile profile : {BotProfile::port_scan, BotProfile::beacon}) {
    SynthConfig cfg = small_config();
    cfg.botnet_behavior = profile;
    cfg.n_botnet_sources = 3;
    cfg.botnet_flow_rate = 12;
    const FlowTable t = generate_scenario(cfg);
    CHECK(cfg.botnet_flow_count() == 3 * 120);
    CHECK(t.records.size() == cfg.n_background_flows + cfg.botnet_flow_count());
    CHECK(botnet_flows(t) == cfg.botnet_flow_count());
    const double target = double(cfg.botnet_flow_count()) / double(t.records.size());
    CHECK(std::abs(double(botnet_flows(t)) / double(t.records.size()) - target) <= 0.2 * target);
    CHECK(std::is_sorted(t.records.begin(), t.records.end(),
                         [](const FlowRecord& a, const FlowRecord& b) { return a.start_time < b.start_time; }));
    const Timestamp start = *parse_timestamp(cfg.start_time);
    for (const auto& r : t.records) {
      CHECK(r.start_time.ns >= start.ns);
      CHECK(seconds_between(start, r.start_time) < cfg.duration);
      CHECK(r.tot_bytes >= r.src_bytes);
      CHECK(r.tot_pkts >= 1);
    }
    CHECK(t.parse_stats.accepted == t.records.size());
  }
}

TEST_CASE("zero bots gives an all-background scenario") {
  SynthConfig cfg = small_config();
  cfg.n_botnet_sources = 0;
  const FlowTable t = generate_scenario(cfg);
  CHECK(t.records.size() == cfg.n_background_flows);
  CHECK(botnet_flows(t) == 0);
  CHECK(build_dataset(t).positives() == 0);
}

TEST_CASE("noise keeps bot labels but draws background-like flows") {
  SynthConfig cfg = small_config();
  cfg.noise = 1.0;
  const FlowTable t = generate_scenario(cfg);
  CHECK(botnet_flows(t) == cfg.botnet_flow_count());
  for (const auto& r : t.records)
    if (r.label.find("Botnet") != std::string::npos) CHECK(r.label.find("Noise") != std::string::npos);
}

TEST_CASE("generated flows survive the CSV reader") {
  const FlowTable t = generate_scenario(small_config());
  std::istringstream in(csv_of(t));
  const FlowTable back = read_flows(in, "synthetic");
  CHECK(back.parse_stats.rejected == 0);
  REQUIRE(back.records.size() == t.records.size());
  for (std::size_t i = 0; i < t.records.size(); ++i) CHECK(back.records[i] == t.records[i]);
}

TEST_CASE("port-scan windows have high destination-port entropy") {
  int separated = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SynthConfig cfg = small_config();
    cfg.seed = seed;
    const Dataset ds = build_dataset(generate_scenario(cfg));
    std::vector<double> bot, background;
    for (Eigen::Index i = 0; i < ds.rows(); ++i) {
      if (ds.features(i, 0) < 2) continue;
      (ds.labels[i] ? bot : background).push_back(ds.features(i, 21));
    }
    REQUIRE(!bot.empty());
    separated += oracle::median(bot) > 0.9 && oracle::mean(bot) > oracle::mean(background);
  }
  CHECK(separated == 10);
}

TEST_CASE("beacon windows contact a single destination") {
  SynthConfig cfg = small_config();
  cfg.botnet_behavior = BotProfile::beacon;
  const Dataset ds = build_dataset(generate_scenario(cfg));
  for (Eigen::Index i = 0; i < ds.rows(); ++i)
    if (ds.labels[i] && ds.features(i, 0) >= 2) CHECK(ds.features(i, 2) <= 2);
}

TEST_CASE("bots can be confined to a short active span") {
  SynthConfig cfg = small_config();
  cfg.n_botnet_sources = 5;
  cfg.botnet_flow_rate = 4;
  cfg.bot_active_duration = 90;
  CHECK(cfg.botnet_flow_count() == 5 * 6);
  const FlowTable t = generate_scenario(cfg);
  CHECK(botnet_flows(t) == 30);
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> span;
  for (const auto& r : t.records) {
    if (r.label.find("Botnet") == std::string::npos) continue;
    auto [it, fresh] = span.try_emplace(r.src_addr, r.start_time.ns, r.start_time.ns);
    it->second.first = std::min(it->second.first, r.start_time.ns);
    it->second.second = std::max(it->second.second, r.start_time.ns);
  }
  CHECK(span.size() == 5);
  for (const auto& [src, s] : span) CHECK(double(s.second - s.first) / 1e9 < 90.0);
  cfg.bot_active_duration = 601;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("mimic bots repeat one background-like flow") {
  SynthConfig cfg = small_config();
  cfg.botnet_behavior = BotProfile::mimic;
  cfg.n_botnet_sources = 4;
  cfg.jitter = 0.1;
  const FlowTable t = generate_scenario(cfg);
  std::map<std::string, std::set<std::string>> targets;
  std::map<std::string, std::vector<double>> durations;
  for (const auto& r : t.records) {
    if (r.label.find("Mimic") == std::string::npos) continue;
    targets[r.src_addr].insert(r.proto + " " + r.dst_addr + " " + r.dport.value_or("-"));
    durations[r.src_addr].push_back(r.dur);
    CHECK(r.src_bytes <= r.tot_bytes);
  }
  REQUIRE(targets.size() == 4);
  for (const auto& [src, set] : targets) CHECK(set.size() == 1);
  for (const auto& [src, d] : durations) {
    const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
    CHECK(*hi <= *lo * 1.1 / 0.9 + 2e-6);
  }
}

TEST_CASE("configuration JSON") {
  SynthConfig cfg = small_config();
  cfg.botnet_behavior = BotProfile::beacon;
  cfg.noise = 0.25;
  cfg.bot_active_duration = 120;
  const SynthConfig back = synth_config_from_json(to_json(cfg));
  CHECK(to_json(back) == to_json(cfg));
  CHECK(back.botnet_behavior == BotProfile::beacon);
  CHECK(back.noise == 0.25);

  const SynthConfig partial = synth_config_from_json(R"({"seed": 7, "botnet_behavior": "port_scan"})");
  CHECK(partial.seed == 7);
  CHECK(partial.n_background_flows == SynthConfig{}.n_background_flows);
  CHECK_THROWS_AS(synth_config_from_json(R"({"sed": 7})"), Error);
  CHECK_THROWS_AS(synth_config_from_json("[1,2]"), Error);
  CHECK_THROWS_AS(synth_config_from_json(R"({"botnet_behavior": "ddos"})"), Error);
}

TEST_CASE("configuration validation") {
  SynthConfig cfg = small_config();
  CHECK_NOTHROW(cfg.validate());
  cfg.duration = 60;
  CHECK_THROWS_AS(cfg.validate(), Error);
  CHECK_NOTHROW(cfg.validate(30));
  cfg = small_config();
  cfg.noise = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = small_config();
  cfg.botnet_flow_rate = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.n_botnet_sources = 0;
  CHECK_NOTHROW(cfg.validate());
  cfg = small_config();
  cfg.start_time = "yesterday";
  CHECK_THROWS_AS(cfg.validate(), Error);
  CHECK_THROWS_AS(generate_scenario(cfg), Error);
  CHECK(to_string(parse_profile("port-scan")) == "port-scan");
  CHECK(to_string(parse_profile("mimic")) == "mimic");
  CHECK_THROWS_AS(parse_profile("scan"), Error);
}

#include "flowbot/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

namespace flowbot {

namespace {

constexpr const char* kCommonPorts[] = {"80", "443", "53", "25", "123", "110", "143", "993", "8080", "22", "137", "3389"};

std::string ip(int a, int b, std::size_t index) {
  return std::to_string(a) + "." + std::to_string(b) + "." + std::to_string((index / 250) % 250) + "." +
         std::to_string(index % 250 + 1);
}

std::string hex_port(unsigned v) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "0x%04x", v & 0xFFFF);
  return buf;
}

class Generator {
 public:
  explicit Generator(const SynthConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {}

  double uniform(double a = 0, double b = 1) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

  // Heavy-hitter skew: low indices are drawn far more often.
  std::size_t skewed(std::size_t n) {
    const double u = uniform();
    return std::min(n - 1, static_cast<std::size_t>(static_cast<double>(n) * u * u * u));
  }

  std::int64_t offset_ns(double seconds) const { return static_cast<std::int64_t>(std::llround(seconds * 1e6)) * 1000; }

  FlowRecord background(Timestamp origin, double at, const std::string& src) {
    FlowRecord r;
    r.start_time = Timestamp{origin.ns + offset_ns(at)};
    r.src_addr = src;
    r.dst_addr = ip(147, 32, skewed(cfg_.n_background_destinations) + 7);
    const double p = uniform();
    r.dur = std::min(3600.0, std::round(std::exp(std::normal_distribution<double>(cfg_.dur_log_mu, cfg_.dur_log_sigma)(rng_)) * 1e6) / 1e6);
    const double size = cfg_.bytes_min * std::pow(1.0 - uniform(), -1.0 / cfg_.bytes_pareto_alpha);
    r.tot_bytes = static_cast<std::uint64_t>(std::min(size, 2e9));
    r.tot_pkts = std::max<std::uint64_t>(1, r.tot_bytes / 400);
    r.src_bytes = static_cast<std::uint64_t>(static_cast<double>(r.tot_bytes) * uniform(0.1, 0.9));
    r.s_tos = 0;
    r.d_tos = 0;
    if (p < 0.05) {
      r.proto = "icmp";
      r.dir = "->";
      r.sport = hex_port(8);
      r.dport = hex_port(static_cast<unsigned>(index(4)));
      r.state = "ECO";
      r.d_tos.reset();
      r.label = "flow=Background";
    } else if (p < 0.40) {
      r.proto = "udp";
      r.dir = "<->";
      r.sport = std::to_string(1024 + index(64000));
      r.dport = uniform() < 0.8 ? "53" : std::to_string(1024 + index(64000));
      r.state = "CON";
      r.label = r.dport == "53" ? "flow=Background-UDP-Established" : "flow=Background-UDP-Attempt";
    } else {
      r.proto = "tcp";
      r.dir = "->";
      r.sport = std::to_string(1024 + index(64000));
      r.dport = uniform() < 0.85 ? kCommonPorts[skewed(std::size(kCommonPorts))] : std::to_string(1 + index(65535));
      r.state = uniform() < 0.7 ? "FSPA_FSPA" : "S_RA";
      r.label = uniform() < 0.03 ? "flow=From-Normal-V42-StribrRecord" : "flow=Background-TCP-Established";
    }
    return r;
  }

  // Flow a mimic bot repeats; unused by the other profiles.
  FlowRecord style(Timestamp origin, const std::string& src) {
    if (cfg_.botnet_behavior != BotProfile::mimic) return {};
    return background(origin, 0, src);
  }

  FlowRecord bot(Timestamp origin, double at, const std::string& src, std::size_t bot_index, const FlowRecord& style) {
    if (uniform() < cfg_.noise) {
      FlowRecord r = background(origin, at, src);
      r.label = "flow=From-Botnet-Synth-Noise";
      return r;
    }
    if (cfg_.botnet_behavior == BotProfile::mimic) {
      FlowRecord r = style;
      r.start_time = Timestamp{origin.ns + offset_ns(at)};
      if (r.proto != "icmp") r.sport = std::to_string(1024 + index(64000));
      r.dur = std::round(style.dur * (1.0 + cfg_.jitter * uniform(-1, 1)) * 1e6) / 1e6;
      const double scale = 1.0 + cfg_.jitter * uniform(-1, 1);
      r.tot_bytes = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(static_cast<double>(style.tot_bytes) * scale));
      r.src_bytes = std::min(r.tot_bytes, static_cast<std::uint64_t>(static_cast<double>(style.src_bytes) * scale));
      r.tot_pkts = std::max<std::uint64_t>(1, r.tot_bytes / 400);
      r.label = "flow=From-Botnet-Synth-Mimic";
      return r;
    }
    FlowRecord r;
    r.start_time = Timestamp{origin.ns + offset_ns(at)};
    r.src_addr = src;
    r.proto = "tcp";
    r.dir = "->";
    r.s_tos = 0;
    r.d_tos = 0;
    r.sport = std::to_string(1024 + index(64000));
    if (cfg_.botnet_behavior == BotProfile::port_scan) {
      r.dst_addr = ip(147, 32, index(60000));
      r.dport = std::to_string(1 + index(65535));
      r.state = "S_RA";
      r.dur = std::round(uniform(0.0, 0.005) * 1e6) / 1e6;
      r.tot_pkts = 1 + index(2);
      r.tot_bytes = 60 * r.tot_pkts + index(20);
      r.src_bytes = 60;
      r.label = "flow=From-Botnet-Synth-PortScan";
    } else {
      r.dst_addr = ip(82, 113, 17 + bot_index);
      r.dport = "8080";
      r.state = "FSPA_FSPA";
      r.dur = std::round(2.0 * (1.0 + cfg_.jitter * uniform(-1, 1)) * 1e6) / 1e6;
      r.tot_bytes = static_cast<std::uint64_t>(1500.0 * (1.0 + cfg_.jitter * uniform(-1, 1)));
      r.tot_pkts = std::max<std::uint64_t>(1, r.tot_bytes / 300);
      r.src_bytes = r.tot_bytes / 3;
      r.label = "flow=From-Botnet-Synth-Beacon";
    }
    return r;
  }

 private:
  const SynthConfig& cfg_;
  std::mt19937_64 rng_;
};

}  // namespace

std::string_view to_string(BotProfile p) {
  switch (p) {
    case BotProfile::port_scan: return "port-scan";
    case BotProfile::beacon: return "beacon";
    case BotProfile::mimic: return "mimic";
  }
  return "?";
}

BotProfile parse_profile(std::string_view s) {
  if (s == "port-scan" || s == "port_scan") return BotProfile::port_scan;
  if (s == "beacon") return BotProfile::beacon;
  if (s == "mimic") return BotProfile::mimic;
  throw Error("unknown botnet behavior '" + std::string(s) + "'");
}

void SynthConfig::validate(double min_duration) const {
  if (n_background_flows == 0 || n_background_sources == 0 || n_background_destinations == 0)
    throw Error("synth config: background counts must be positive");
  if (n_botnet_sources > 0 && !(botnet_flow_rate > 0)) throw Error("synth config: botnet_flow_rate must be positive");
  if (!(duration >= min_duration)) throw Error("synth config: duration must cover at least one window width");
  if (!(noise >= 0 && noise <= 1)) throw Error("synth config: noise must lie in [0, 1]");
  if (!(jitter >= 0 && jitter < 1)) throw Error("synth config: jitter must lie in [0, 1)");
  if (!(bot_active_duration >= 0) || bot_active_duration > duration)
    throw Error("synth config: bot_active_duration must lie in [0, duration]");
  if (n_botnet_sources > 0 && botnet_flow_count() == 0)
    throw Error("synth config: botnet_flow_rate too low to give each bot a flow");
  if (!(dur_log_sigma >= 0) || !(bytes_pareto_alpha > 0) || !(bytes_min > 0))
    throw Error("synth config: invalid distribution parameters");
  if (!parse_timestamp(start_time)) throw Error("synth config: bad start_time '" + start_time + "'");
}

std::size_t SynthConfig::botnet_flow_count() const {
  const auto per_bot = static_cast<std::size_t>(std::llround(botnet_flow_rate * active_span() / 60.0));
  return n_botnet_sources * per_bot;
}

SynthConfig synth_config_from_json(const std::string& text) {
  SynthConfig cfg;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& [key, v] : j.items()) {
      if (key == "n_background_flows") cfg.n_background_flows = v.get<std::size_t>();
      else if (key == "n_background_sources") cfg.n_background_sources = v.get<std::size_t>();
      else if (key == "n_background_destinations") cfg.n_background_destinations = v.get<std::size_t>();
      else if (key == "n_botnet_sources") cfg.n_botnet_sources = v.get<std::size_t>();
      else if (key == "botnet_flow_rate") cfg.botnet_flow_rate = v.get<double>();
      else if (key == "duration") cfg.duration = v.get<double>();
      else if (key == "botnet_behavior") cfg.botnet_behavior = parse_profile(v.get<std::string>());
      else if (key == "bot_active_duration") cfg.bot_active_duration = v.get<double>();
      else if (key == "noise") cfg.noise = v.get<double>();
      else if (key == "jitter") cfg.jitter = v.get<double>();
      else if (key == "dur_log_mu") cfg.dur_log_mu = v.get<double>();
      else if (key == "dur_log_sigma") cfg.dur_log_sigma = v.get<double>();
      else if (key == "bytes_pareto_alpha") cfg.bytes_pareto_alpha = v.get<double>();
      else if (key == "bytes_min") cfg.bytes_min = v.get<double>();
      else if (key == "start_time") cfg.start_time = v.get<std::string>();
      else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else throw Error("synth config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("synth config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string to_json(const SynthConfig& cfg) {
  nlohmann::ordered_json j;
  j["n_background_flows"] = cfg.n_background_flows;
  j["n_background_sources"] = cfg.n_background_sources;
  j["n_background_destinations"] = cfg.n_background_destinations;
  j["n_botnet_sources"] = cfg.n_botnet_sources;
  j["botnet_flow_rate"] = cfg.botnet_flow_rate;
  j["duration"] = cfg.duration;
  j["botnet_behavior"] = to_string(cfg.botnet_behavior);
  j["bot_active_duration"] = cfg.bot_active_duration;
  j["noise"] = cfg.noise;
  j["jitter"] = cfg.jitter;
  j["dur_log_mu"] = cfg.dur_log_mu;
  j["dur_log_sigma"] = cfg.dur_log_sigma;
  j["bytes_pareto_alpha"] = cfg.bytes_pareto_alpha;
  j["bytes_min"] = cfg.bytes_min;
  j["start_time"] = cfg.start_time;
  j["seed"] = cfg.seed;
  return j.dump(2);
}

FlowTable generate_scenario(const SynthConfig& cfg) {
  cfg.validate();
  Generator gen(cfg);
  const Timestamp origin = *parse_timestamp(cfg.start_time);
  FlowTable table;
  table.source_path = "synthetic";
  table.records.reserve(cfg.n_background_flows + cfg.botnet_flow_count());

  for (std::size_t i = 0; i < cfg.n_background_flows; ++i) {
    const std::string src = ip(147, 32, gen.skewed(cfg.n_background_sources) + 300);
    table.records.push_back(gen.background(origin, gen.uniform(0, cfg.duration), src));
  }
  const auto per_bot = cfg.n_botnet_sources ? cfg.botnet_flow_count() / cfg.n_botnet_sources : 0;
  for (std::size_t b = 0; b < cfg.n_botnet_sources; ++b) {
    const std::string src = ip(10, 66, b);
    const double active = cfg.active_span();
    const double start = active < cfg.duration ? gen.uniform(0, cfg.duration - active) : 0.0;
    const auto style = gen.style(origin, src);
    const double period = active / static_cast<double>(per_bot);
    const double phase = gen.uniform(0, period);
    for (std::size_t k = 0; k < per_bot; ++k) {
      double at = phase + period * static_cast<double>(k);
      if (cfg.botnet_behavior == BotProfile::beacon)
        at += cfg.jitter * period * gen.uniform(-0.5, 0.5);
      else
        at = period * (static_cast<double>(k) + gen.uniform());
      at = std::clamp(start + at, start, std::nextafter(start + active, 0.0));
      table.records.push_back(gen.bot(origin, at, src, b, style));
    }
  }
  std::stable_sort(table.records.begin(), table.records.end(),
                   [](const FlowRecord& a, const FlowRecord& b) { return a.start_time < b.start_time; });
  table.parse_stats.accepted = table.records.size();
  return table;
}

}  // namespace flowbot

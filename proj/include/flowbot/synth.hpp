#pragma once

#include "flowbot/flow.hpp"

#include <cstdint>
#include <string>

namespace flowbot {

enum class BotProfile {
  port_scan,  // many destinations and ports, tiny flows
  beacon,     // periodic contacts to one C&C endpoint, steady duration
  mimic,      // repeats one background-like flow per bot, with jitter
};

std::string_view to_string(BotProfile p);
BotProfile parse_profile(std::string_view s);

struct SynthConfig {
  std::size_t n_background_flows = 50000;
  std::size_t n_background_sources = 20000;
  std::size_t n_background_destinations = 3000;
  std::size_t n_botnet_sources = 1;
  double botnet_flow_rate = 30.0;  // flows per minute per bot
  double duration = 3600.0;        // seconds
  BotProfile botnet_behavior = BotProfile::port_scan;
  double bot_active_duration = 0.0;  // seconds each bot is active, at a random offset; 0: whole duration
  double noise = 0.0;              // share of bot flows drawn from the background generator
  double jitter = 0.1;             // relative spread of beacon period / duration / size
  double dur_log_mu = -6.9;        // log-normal background durations (median ~1 ms)
  double dur_log_sigma = 3.0;
  double bytes_pareto_alpha = 1.1; // Pareto-tailed background sizes
  double bytes_min = 60.0;
  std::string start_time = "2011/08/10 09:46:53";
  std::uint64_t seed = 42;

  /// Throws Error for non-positive counts, duration below `min_duration`, or
  /// out-of-range noise.
  void validate(double min_duration = 120.0) const;

  double active_span() const { return bot_active_duration > 0 ? bot_active_duration : duration; }

  /// Number of bot flows: n_botnet_sources * round(rate * active span / 60).
  std::size_t botnet_flow_count() const;
};

SynthConfig synth_config_from_json(const std::string& text);
std::string to_json(const SynthConfig& cfg);

/// Deterministic per seed; records sorted by start time.
FlowTable generate_scenario(const SynthConfig& cfg);

}  // namespace flowbot

#pragma once

#include "flowbot/dataset.hpp"
#include "flowbot/flow.hpp"

#include <random>
#include <string>

namespace testing {

inline flowbot::FlowRecord flow(double offset_seconds, const std::string& src = "147.32.84.165",
                                const std::string& label = "flow=Background") {
  flowbot::FlowRecord r;
  r.start_time = *flowbot::parse_timestamp("2011/08/10 09:46:53");
  r.start_time.ns += static_cast<std::int64_t>(offset_seconds * 1e9);
  r.dur = 1.0;
  r.proto = "tcp";
  r.src_addr = src;
  r.sport = "1025";
  r.dir = "->";
  r.dst_addr = "147.32.80.9";
  r.dport = "80";
  r.state = "S_RA";
  r.s_tos = 0;
  r.d_tos = 0;
  r.tot_pkts = 2;
  r.tot_bytes = 120;
  r.src_bytes = 60;
  r.label = label;
  return r;
}

/// Gaussian features; label = 1 when the first feature exceeds `cut`.
inline flowbot::Dataset threshold_dataset(Eigen::Index n, Eigen::Index d, std::uint64_t seed, double cut = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  flowbot::Matrix x(n, d);
  flowbot::Labels y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = g(rng);
    y[i] = x(i, 0) > cut ? 1 : 0;
  }
  return flowbot::make_dataset(std::move(x), std::move(y));
}

}  // namespace testing

#pragma once

#include "flowbot/dataset.hpp"
#include "flowbot/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <ranges>
#include <span>
#include <string_view>
#include <vector>

namespace flowbot {

struct WindowConfig {
  double width = 120.0;   // seconds
  double stride = 60.0;   // seconds
  std::optional<Timestamp> origin;  // defaults to the earliest start_time

  /// Throws Error unless 0 < stride <= width.
  void validate() const;
};

inline constexpr std::size_t kFeatureCount = 22;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "counts",        "Sport_nunique", "DstAddr_nunique", "Dport_nunique",   "Dur_sum",        "Dur_mean",
    "Dur_std",       "Dur_max",       "Dur_median",      "TotBytes_sum",    "TotBytes_mean",  "TotBytes_std",
    "TotBytes_max",  "TotBytes_median", "SrcBytes_sum",  "SrcBytes_mean",   "SrcBytes_std",   "SrcBytes_max",
    "SrcBytes_median", "Sport_RU",    "DstAddr_RU",      "Dport_RU"};

std::vector<std::string> feature_names();

/// Inclusive range [first, last] of window indices k >= 0 whose span
/// [origin + k*stride, origin + k*stride + width) contains t. Empty when t
/// precedes the origin.
struct WindowRange {
  std::uint64_t first = 1;
  std::uint64_t last = 0;
  bool empty() const { return first > last; }
  std::uint64_t size() const { return empty() ? 0 : last - first + 1; }
};

WindowRange windows_containing(Timestamp t, Timestamp origin, const WindowConfig& cfg);

/// Window index -> indices of the flows whose start_time falls inside it.
std::map<std::uint64_t, std::vector<std::size_t>> assign_windows(const FlowTable& table, const WindowConfig& cfg);

/// Shannon entropy of a category distribution divided by ln(m), m = number of
/// categories. Zero for a single category; exactly one for uniform counts.
template <typename Scalar = double, std::ranges::input_range Counts>
Scalar normalized_entropy(const Counts& counts) {
  std::vector<Scalar> c;
  for (const auto& v : counts) {
    if (!(v > 0)) throw Error("normalized_entropy: counts must be positive");
    c.push_back(static_cast<Scalar>(v));
  }
  if (c.empty()) throw Error("normalized_entropy: empty input");
  if (c.size() == 1) return Scalar(0);
  // Sorted accumulation keeps the result independent of category order.
  std::sort(c.begin(), c.end());
  if (c.front() == c.back()) return Scalar(1);
  Scalar total = 0;
  for (Scalar v : c) total += v;
  Scalar h = 0;
  for (Scalar v : c) {
    const Scalar p = v / total;
    h -= p * std::log(p);
  }
  const Scalar ru = h / std::log(static_cast<Scalar>(c.size()));
  return std::clamp(ru, Scalar(0), Scalar(1));
}

/// Members of one (window, source address) group.
struct WindowGroup {
  std::uint64_t window_index = 0;
  std::string src_addr;
  std::vector<const FlowRecord*> members;
};

using FeatureVector = std::array<double, kFeatureCount>;

FeatureVector extract_features(const WindowGroup& group);

/// 1 iff any member label contains "Botnet".
int label_group(const WindowGroup& group);

/// One row per nonempty (window, source) pair, ordered by window index then
/// source address.
Dataset build_dataset(const FlowTable& table, const WindowConfig& cfg = {});

}  // namespace flowbot

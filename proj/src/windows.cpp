#include "flowbot/windows.hpp"

#include <cmath>
#include <numeric>
#include <string_view>
#include <unordered_map>

namespace flowbot {

namespace {

std::int64_t to_ns(double seconds) { return static_cast<std::int64_t>(std::llround(seconds * 1e9)); }

struct ColumnStats {
  double sum = 0, mean = 0, std = 0, max = 0, median = 0;
};

ColumnStats column_stats(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  ColumnStats s;
  const auto n = static_cast<double>(v.size());
  for (double x : v) s.sum += x;
  s.mean = s.sum / n;
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / n);
  }
  s.max = v.back();
  const std::size_t mid = v.size() / 2;
  s.median = v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  return s;
}

template <typename Get>
std::pair<double, double> categorical_stats(const WindowGroup& g, Get get) {
  std::unordered_map<std::string_view, std::size_t> counts;
  for (const FlowRecord* r : g.members) ++counts[get(*r)];
  std::vector<std::size_t> c;
  c.reserve(counts.size());
  for (const auto& kv : counts) c.push_back(kv.second);
  return {static_cast<double>(c.size()), normalized_entropy(c)};
}

std::string_view opt_view(const std::optional<std::string>& s) { return s ? std::string_view(*s) : kAbsentToken; }

}  // namespace

void WindowConfig::validate() const {
  if (!(stride > 0) || !(width > 0) || stride > width || !std::isfinite(width))
    throw Error("window config requires 0 < stride <= width");
  if (to_ns(stride) <= 0) throw Error("window stride below timestamp resolution");
}

std::vector<std::string> feature_names() { return {kFeatureNames.begin(), kFeatureNames.end()}; }

WindowRange windows_containing(Timestamp t, Timestamp origin, const WindowConfig& cfg) {
  const std::int64_t offset = t.ns - origin.ns;
  if (offset < 0) return {};
  const std::int64_t width = to_ns(cfg.width);
  const std::int64_t stride = to_ns(cfg.stride);
  WindowRange r;
  r.last = static_cast<std::uint64_t>(offset / stride);
  r.first = offset >= width ? static_cast<std::uint64_t>((offset - width) / stride + 1) : 0;
  return r;
}

std::map<std::uint64_t, std::vector<std::size_t>> assign_windows(const FlowTable& table, const WindowConfig& cfg) {
  cfg.validate();
  std::map<std::uint64_t, std::vector<std::size_t>> out;
  if (table.records.empty()) return out;
  Timestamp origin = cfg.origin.value_or(table.records.front().start_time);
  if (!cfg.origin)
    for (const auto& r : table.records) origin = std::min(origin, r.start_time);
  for (std::size_t i = 0; i < table.records.size(); ++i) {
    const auto range = windows_containing(table.records[i].start_time, origin, cfg);
    for (std::uint64_t k = range.first; !range.empty() && k <= range.last; ++k) out[k].push_back(i);
  }
  return out;
}

FeatureVector extract_features(const WindowGroup& group) {
  if (group.members.empty()) throw Error("extract_features: empty group");
  FeatureVector f{};
  f[0] = static_cast<double>(group.members.size());

  const auto sport = categorical_stats(group, [](const FlowRecord& r) { return opt_view(r.sport); });
  const auto dst = categorical_stats(group, [](const FlowRecord& r) { return std::string_view(r.dst_addr); });
  const auto dport = categorical_stats(group, [](const FlowRecord& r) { return opt_view(r.dport); });
  f[1] = sport.first;
  f[2] = dst.first;
  f[3] = dport.first;
  f[19] = sport.second;
  f[20] = dst.second;
  f[21] = dport.second;

  std::vector<double> values(group.members.size());
  auto numeric = [&](std::size_t offset, auto get) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = get(*group.members[i]);
    const auto s = column_stats(values);
    f[offset + 0] = s.sum;
    f[offset + 1] = s.mean;
    f[offset + 2] = s.std;
    f[offset + 3] = s.max;
    f[offset + 4] = s.median;
  };
  numeric(4, [](const FlowRecord& r) { return r.dur; });
  numeric(9, [](const FlowRecord& r) { return static_cast<double>(r.tot_bytes); });
  numeric(14, [](const FlowRecord& r) { return static_cast<double>(r.src_bytes); });
  return f;
}

int label_group(const WindowGroup& group) {
  for (const FlowRecord* r : group.members)
    if (r->label.find("Botnet") != std::string::npos) return 1;
  return 0;
}

Dataset build_dataset(const FlowTable& table, const WindowConfig& cfg) {
  cfg.validate();
  const auto& rs = table.records;
  if (rs.empty()) throw Error("build_dataset: flow table is empty");

  Timestamp origin = rs.front().start_time;
  for (const auto& r : rs) origin = std::min(origin, r.start_time);
  if (cfg.origin) origin = *cfg.origin;

  // Rank source addresses lexicographically so sorting by rank orders rows.
  std::vector<std::string_view> addrs;
  {
    std::unordered_map<std::string_view, std::uint32_t> seen;
    for (const auto& r : rs)
      if (seen.emplace(r.src_addr, 0).second) addrs.push_back(r.src_addr);
  }
  std::sort(addrs.begin(), addrs.end());
  std::unordered_map<std::string_view, std::uint32_t> rank;
  rank.reserve(addrs.size());
  for (std::uint32_t i = 0; i < addrs.size(); ++i) rank.emplace(addrs[i], i);

  struct Entry {
    std::uint64_t window;
    std::uint32_t src;
    std::uint32_t flow;
  };
  std::vector<Entry> entries;
  entries.reserve(rs.size() * 2);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const auto range = windows_containing(rs[i].start_time, origin, cfg);
    const auto src = rank.at(rs[i].src_addr);
    for (std::uint64_t k = range.first; !range.empty() && k <= range.last; ++k)
      entries.push_back({k, src, static_cast<std::uint32_t>(i)});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.window != b.window) return a.window < b.window;
    if (a.src != b.src) return a.src < b.src;
    return a.flow < b.flow;
  });

  std::vector<std::pair<std::size_t, std::size_t>> segments;  // [begin, end) into entries
  for (std::size_t b = 0; b < entries.size();) {
    std::size_t e = b + 1;
    while (e < entries.size() && entries[e].window == entries[b].window && entries[e].src == entries[b].src) ++e;
    segments.emplace_back(b, e);
    b = e;
  }

  Dataset ds;
  const auto n = static_cast<Eigen::Index>(segments.size());
  ds.features.resize(n, static_cast<Eigen::Index>(kFeatureCount));
  ds.labels.resize(n);
  ds.feature_names = feature_names();
  ds.keys.resize(segments.size());
  ds.meta.scenario = table.source_path;
  ds.meta.window_width = cfg.width;
  ds.meta.window_stride = cfg.stride;

  parallel_for(segments.size(), [&](std::size_t s) {
    const auto [b, e] = segments[s];
    WindowGroup g;
    g.window_index = entries[b].window;
    g.src_addr = std::string(addrs[entries[b].src]);
    g.members.reserve(e - b);
    for (std::size_t i = b; i < e; ++i) g.members.push_back(&rs[entries[i].flow]);
    const auto f = extract_features(g);
    const auto row = static_cast<Eigen::Index>(s);
    for (std::size_t j = 0; j < kFeatureCount; ++j) ds.features(row, static_cast<Eigen::Index>(j)) = f[j];
    ds.labels[row] = label_group(g);
    ds.keys[s] = RowKey{g.window_index, std::move(g.src_addr)};
  });
  return ds;
}

}  // namespace flowbot

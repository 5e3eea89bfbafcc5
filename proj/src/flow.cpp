#include "flowbot/flow.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace flowbot {

namespace {

constexpr std::int64_t kNsPerSecond = 1'000'000'000;

// Days since 1970-01-01 in the proleptic Gregorian calendar.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y += m <= 2;
}

bool is_leap(std::int64_t y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

unsigned days_in_month(std::int64_t y, unsigned m) {
  static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && is_leap(y) ? 29 : kDays[m - 1];
}

bool read_fixed_digits(std::string_view s, std::size_t pos, std::size_t count, unsigned& out) {
  if (pos + count > s.size()) return false;
  out = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    out = out * 10 + static_cast<unsigned>(s[i] - '0');
  }
  return true;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<std::string> optional_token(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  return std::string(s);
}

// sTos/dTos are written either as integers or as "0.0" style floats.
bool parse_tos(std::string_view s, std::optional<int>& out) {
  s = trim(s);
  if (s.empty()) {
    out.reset();
    return true;
  }
  double v = 0;
  if (!parse_double(s, v) || v < 0 || v > 255 || v != std::floor(v)) return false;
  out = static_cast<int>(v);
  return true;
}

// Byte and packet counters occasionally appear as "123.0".
bool parse_count(std::string_view s, std::uint64_t& out) {
  if (parse_uint(s, out)) return true;
  double v = 0;
  if (!parse_double(s, v) || !(v >= 0) || v != std::floor(v) || v > 1.8e19) return false;
  out = static_cast<std::uint64_t>(v);
  return true;
}

double quantile_sorted_select(std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
  const double a = v[lo];
  if (frac == 0.0 || lo + 1 >= v.size()) return a;
  const double b = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
  return a + frac * (b - a);
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  text = trim(text);
  // YYYY/MM/DD HH:MM:SS
  if (text.size() < 19) return std::nullopt;
  unsigned year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
  if (!read_fixed_digits(text, 0, 4, year) || text[4] != '/' || !read_fixed_digits(text, 5, 2, month) ||
      text[7] != '/' || !read_fixed_digits(text, 8, 2, day) || text[10] != ' ' ||
      !read_fixed_digits(text, 11, 2, hour) || text[13] != ':' || !read_fixed_digits(text, 14, 2, minute) ||
      text[16] != ':' || !read_fixed_digits(text, 17, 2, second))
    return std::nullopt;
  if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month) || hour > 23 || minute > 59 ||
      second > 60)
    return std::nullopt;

  std::int64_t frac_ns = 0;
  if (text.size() > 19) {
    if (text[19] != '.' || text.size() == 20) return std::nullopt;
    std::int64_t scale = kNsPerSecond / 10;
    for (std::size_t i = 20; i < text.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(text[i]))) return std::nullopt;
      frac_ns += (text[i] - '0') * scale;
      scale /= 10;
    }
  }
  const std::int64_t days = days_from_civil(year, month, day);
  const std::int64_t secs = days * 86400 + hour * 3600 + minute * 60 + second;
  return Timestamp{secs * kNsPerSecond + frac_ns};
}

std::string format_timestamp(Timestamp t) {
  std::int64_t secs = t.ns / kNsPerSecond;
  std::int64_t frac = t.ns % kNsPerSecond;
  if (frac < 0) {
    frac += kNsPerSecond;
    --secs;
  }
  std::int64_t days = secs / 86400;
  std::int64_t rem = secs % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  std::int64_t y = 0;
  unsigned m = 0, d = 0;
  civil_from_days(days, y, m, d);
  char buf[64];
  int n = std::snprintf(buf, sizeof(buf), "%04lld/%02u/%02u %02lld:%02lld:%02lld", static_cast<long long>(y), m, d,
                        static_cast<long long>(rem / 3600), static_cast<long long>((rem / 60) % 60),
                        static_cast<long long>(rem % 60));
  std::string out(buf, static_cast<std::size_t>(n));
  if (frac != 0) {
    if (frac % 1000 == 0)
      n = std::snprintf(buf, sizeof(buf), ".%06lld", static_cast<long long>(frac / 1000));
    else
      n = std::snprintf(buf, sizeof(buf), ".%09lld", static_cast<long long>(frac));
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::short_row: return "short_row";
    case RejectReason::bad_timestamp: return "bad_timestamp";
    case RejectReason::bad_duration: return "bad_duration";
    case RejectReason::negative_duration: return "negative_duration";
    case RejectReason::bad_count: return "bad_count";
    case RejectReason::zero_packets: return "zero_packets";
    case RejectReason::bytes_inconsistent: return "bytes_inconsistent";
    case RejectReason::missing_address: return "missing_address";
    case RejectReason::bad_tos: return "bad_tos";
    case RejectReason::bad_label: return "bad_label";
  }
  return "unknown";
}

HeaderMap build_header_map(std::string_view header_line) {
  const auto cells = split_view(header_line, ',');
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < cells.size(); ++i) pos.emplace(std::string(trim(cells[i])), i);
  HeaderMap map;
  map.width = cells.size();
  for (std::size_t c = 0; c < kFlowColumns.size(); ++c) {
    auto it = pos.find(std::string(kFlowColumns[c]));
    if (it == pos.end()) throw Error("flow header lacks column '" + std::string(kFlowColumns[c]) + "'");
    map.index[c] = it->second;
  }
  return map;
}

ParsedFlow parse_flow_record(std::string_view line, const HeaderMap& header) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto cells = split_view(line, ',');
  std::size_t needed = 0;
  for (auto i : header.index) needed = std::max(needed, i + 1);
  if (cells.size() < needed) return RejectReason::short_row;
  auto cell = [&](std::size_t column) { return trim(cells[header.index[column]]); };

  FlowRecord r;
  auto ts = parse_timestamp(cell(0));
  if (!ts) return RejectReason::bad_timestamp;
  r.start_time = *ts;

  if (!parse_double(cell(1), r.dur) || !std::isfinite(r.dur)) return RejectReason::bad_duration;
  if (r.dur < 0) return RejectReason::negative_duration;
  if (r.dur == 0) r.dur = 0.0;  // drop a negative zero

  r.proto = lower(cell(2));
  r.src_addr = std::string(cell(3));
  r.sport = optional_token(cell(4));
  r.dir = std::string(cell(5));
  r.dst_addr = std::string(cell(6));
  r.dport = optional_token(cell(7));
  r.state = optional_token(cell(8));
  if (r.src_addr.empty() || r.dst_addr.empty()) return RejectReason::missing_address;
  if (!parse_tos(cell(9), r.s_tos) || !parse_tos(cell(10), r.d_tos)) return RejectReason::bad_tos;

  if (!parse_count(cell(11), r.tot_pkts) || !parse_count(cell(12), r.tot_bytes) ||
      !parse_count(cell(13), r.src_bytes))
    return RejectReason::bad_count;
  if (r.tot_pkts == 0) return RejectReason::zero_packets;
  if (r.src_bytes > r.tot_bytes) return RejectReason::bytes_inconsistent;

  r.label = std::string(cell(14));
  if (!r.label.empty() && r.label.rfind("flow=", 0) != 0) return RejectReason::bad_label;
  return r;
}

std::string flow_csv_header() {
  std::string out;
  for (std::size_t i = 0; i < kFlowColumns.size(); ++i) {
    if (i) out += ',';
    out += kFlowColumns[i];
  }
  return out;
}

std::string to_csv_row(const FlowRecord& r) {
  std::string out;
  out.reserve(160);
  auto add = [&](std::string_view s) {
    out += s;
    out += ',';
  };
  add(format_timestamp(r.start_time));
  add(format_double(r.dur));
  add(r.proto);
  add(r.src_addr);
  add(r.sport.value_or(""));
  add(r.dir);
  add(r.dst_addr);
  add(r.dport.value_or(""));
  add(r.state.value_or(""));
  add(r.s_tos ? std::to_string(*r.s_tos) : "");
  add(r.d_tos ? std::to_string(*r.d_tos) : "");
  add(std::to_string(r.tot_pkts));
  add(std::to_string(r.tot_bytes));
  add(std::to_string(r.src_bytes));
  out += r.label;
  return out;
}

FlowTable read_flows(std::istream& in, std::string source_name) {
  FlowTable table;
  table.source_path = std::move(source_name);
  std::string line;
  if (!std::getline(in, line)) throw Error(table.source_path + ": missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const HeaderMap header = build_header_map(trim(line));

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto parsed = parse_flow_record(line, header);
    if (auto* rec = std::get_if<FlowRecord>(&parsed)) {
      table.records.push_back(std::move(*rec));
      ++table.parse_stats.accepted;
    } else {
      const auto reason = std::get<RejectReason>(parsed);
      ++table.parse_stats.rejected;
      if (table.parse_stats.first_rejections.size() < kMaxRecordedRejections) {
        table.parse_stats.first_rejections.push_back({line_no, reason});
        warn(table.source_path + ":" + std::to_string(line_no) + ": row skipped (" +
             std::string(to_string(reason)) + ")");
      }
    }
  }
  return table;
}

FlowTable load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open flow file '" + path + "'");
  return read_flows(in, path);
}

void write_flows(std::ostream& out, const FlowTable& table) {
  out << flow_csv_header() << '\n';
  for (const auto& r : table.records) out << to_csv_row(r) << '\n';
}

NumericStats describe(std::vector<double> values) {
  if (values.empty()) throw Error("describe: empty column");
  NumericStats s;
  // Welford
  double mean = 0, m2 = 0;
  s.min = values.front();
  s.max = values.front();
  std::size_t n = 0;
  for (double v : values) {
    ++n;
    const double delta = v - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (v - mean);
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = mean;
  s.std = std::sqrt(std::max(0.0, m2 / static_cast<double>(n)));
  s.median = quantile_sorted_select(values, 0.5);
  s.q3 = quantile_sorted_select(values, 0.75);
  return s;
}

SummaryStats summarize(const FlowTable& table, std::size_t top_k) {
  SummaryStats out;
  const auto& rs = table.records;
  out.row_count = rs.size();

  auto numeric = [&](std::string name, auto get) {
    NumericColumnSummary col{std::move(name), std::nullopt};
    if (!rs.empty()) {
      std::vector<double> v;
      v.reserve(rs.size());
      for (const auto& r : rs) v.push_back(static_cast<double>(get(r)));
      col.stats = describe(std::move(v));
    }
    out.numeric.push_back(std::move(col));
  };
  numeric("Dur", [](const FlowRecord& r) { return r.dur; });
  numeric("TotPkts", [](const FlowRecord& r) { return r.tot_pkts; });
  numeric("TotBytes", [](const FlowRecord& r) { return r.tot_bytes; });
  numeric("SrcBytes", [](const FlowRecord& r) { return r.src_bytes; });

  auto categorical = [&](std::string name, auto get) {
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& r : rs) ++counts[get(r)];
    CategoricalColumnSummary col;
    col.name = std::move(name);
    col.distinct = counts.size();
    col.top.assign(counts.begin(), counts.end());
    std::sort(col.top.begin(), col.top.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (col.top.size() > top_k) col.top.resize(top_k);
    out.categorical.push_back(std::move(col));
  };
  auto opt = [](const std::optional<std::string>& s) { return s ? *s : std::string(kAbsentToken); };
  auto opt_int = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(kAbsentToken); };
  categorical("Proto", [](const FlowRecord& r) { return r.proto; });
  categorical("SrcAddr", [](const FlowRecord& r) { return r.src_addr; });
  categorical("Sport", [&](const FlowRecord& r) { return opt(r.sport); });
  categorical("DstAddr", [](const FlowRecord& r) { return r.dst_addr; });
  categorical("Dport", [&](const FlowRecord& r) { return opt(r.dport); });
  categorical("State", [&](const FlowRecord& r) { return opt(r.state); });
  categorical("Label", [](const FlowRecord& r) { return r.label; });
  categorical("Dir", [](const FlowRecord& r) { return r.dir; });
  categorical("sTos", [&](const FlowRecord& r) { return opt_int(r.s_tos); });
  categorical("dTos", [&](const FlowRecord& r) { return opt_int(r.d_tos); });
  return out;
}

void print_summary(std::ostream& out, const SummaryStats& s) {
  out << "rows: " << s.row_count << '\n';
  out << std::left << std::setw(10) << "column" << std::right;
  for (const char* h : {"min", "max", "mean", "std", "median", "q3"}) out << std::setw(16) << h;
  out << '\n';
  for (const auto& c : s.numeric) {
    out << std::left << std::setw(10) << c.name << std::right;
    if (!c.stats) {
      out << "  (empty)\n";
      continue;
    }
    const auto& st = *c.stats;
    for (double v : {st.min, st.max, st.mean, st.std, st.median, st.q3}) out << std::setw(16) << std::setprecision(9) << v;
    out << '\n';
  }
  for (const auto& c : s.categorical) {
    out << c.name << ": " << c.distinct << " distinct";
    for (const auto& [key, count] : c.top) out << "  " << key << '=' << count;
    out << '\n';
  }
}

}  // namespace flowbot

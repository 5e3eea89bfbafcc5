#pragma once

#include "flowbot/common.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace flowbot {

/// Naive timeline point in nanoseconds since 1970-01-01 00:00:00; no zone math.
struct Timestamp {
  std::int64_t ns = 0;
  auto operator<=>(const Timestamp&) const = default;
};

/// Accepts "YYYY/MM/DD HH:MM:SS[.f...]" with any fraction width (digits past
/// nanoseconds are truncated).
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

inline double seconds_between(Timestamp from, Timestamp to) {
  return static_cast<double>(to.ns - from.ns) * 1e-9;
}

/// One bidirectional NetFlow row. Addresses and ports stay opaque strings
/// (captures contain hexadecimal port tokens such as 0x0303).
struct FlowRecord {
  Timestamp start_time;
  double dur = 0.0;
  std::string proto;
  std::string src_addr;
  std::optional<std::string> sport;
  std::string dir;
  std::string dst_addr;
  std::optional<std::string> dport;
  std::optional<std::string> state;
  std::optional<int> s_tos;
  std::optional<int> d_tos;
  std::uint64_t tot_pkts = 0;
  std::uint64_t tot_bytes = 0;
  std::uint64_t src_bytes = 0;
  std::string label;

  bool operator==(const FlowRecord&) const = default;
};

inline constexpr std::array<std::string_view, 15> kFlowColumns = {
    "StartTime", "Dur",   "Proto",   "SrcAddr", "Sport",    "Dir",      "DstAddr", "Dport",
    "State",     "sTos",  "dTos",    "TotPkts", "TotBytes", "SrcBytes", "Label"};

enum class RejectReason {
  short_row,
  bad_timestamp,
  bad_duration,
  negative_duration,
  bad_count,
  zero_packets,
  bytes_inconsistent,
  missing_address,
  bad_tos,
  bad_label,
};

std::string_view to_string(RejectReason r);

/// Position of each canonical column inside a data row.
struct HeaderMap {
  std::array<std::size_t, kFlowColumns.size()> index{};
  std::size_t width = 0;
};

/// Throws Error naming the first canonical column the header lacks.
HeaderMap build_header_map(std::string_view header_line);

using ParsedFlow = std::variant<FlowRecord, RejectReason>;

ParsedFlow parse_flow_record(std::string_view line, const HeaderMap& header);

/// Canonical CSV header / row (the 15 columns in kFlowColumns order).
std::string flow_csv_header();
std::string to_csv_row(const FlowRecord& r);

struct Rejection {
  std::size_t line = 0;
  RejectReason reason = RejectReason::short_row;
};

struct ParseStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::vector<Rejection> first_rejections;  // at most kMaxRecordedRejections
};

inline constexpr std::size_t kMaxRecordedRejections = 10;

/// Immutable after load; safe to share read-only.
struct FlowTable {
  std::vector<FlowRecord> records;
  std::string source_path;
  ParseStats parse_stats;
};

FlowTable read_flows(std::istream& in, std::string source_name);
FlowTable load_scenario(const std::string& path);
void write_flows(std::ostream& out, const FlowTable& table);

// --- summary statistics --------------------------------------------------

struct NumericStats {
  double min = 0, max = 0, mean = 0, std = 0, median = 0, q3 = 0;
};

struct NumericColumnSummary {
  std::string name;
  std::optional<NumericStats> stats;  // absent on an empty table
};

struct CategoricalColumnSummary {
  std::string name;
  std::size_t distinct = 0;
  std::vector<std::pair<std::string, std::size_t>> top;  // by count desc, then key asc
};

struct SummaryStats {
  std::size_t row_count = 0;
  std::vector<NumericColumnSummary> numeric;          // Dur, TotPkts, TotBytes, SrcBytes
  std::vector<CategoricalColumnSummary> categorical;  // Proto, SrcAddr, Sport, DstAddr, ...
};

/// Token used wherever an optional categorical value is missing.
inline constexpr std::string_view kAbsentToken = "\xE2\x88\x85";  // "∅"

/// Population std; median and 3rd quartile by linear interpolation between
/// order statistics.
NumericStats describe(std::vector<double> values);

SummaryStats summarize(const FlowTable& table, std::size_t top_k = 10);

void print_summary(std::ostream& out, const SummaryStats& s);

}  // namespace flowbot

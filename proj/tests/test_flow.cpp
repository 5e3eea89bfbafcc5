#include <doctest.h>

#include "flowbot/flow.hpp"
#include "flowbot/synth.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

#include <random>
#include <sstream>

using namespace flowbot;

namespace {

const std::string kHeader =
    "StartTime,Dur,Proto,SrcAddr,Sport,Dir,DstAddr,Dport,State,sTos,dTos,TotPkts,TotBytes,SrcBytes,Label";

FlowRecord parse_ok(const std::string& row, const std::string& header = kHeader) {
  auto parsed = parse_flow_record(row, build_header_map(header));
  REQUIRE(std::holds_alternative<FlowRecord>(parsed));
  return std::get<FlowRecord>(parsed);
}

RejectReason parse_bad(const std::string& row) {
  auto parsed = parse_flow_record(row, build_header_map(kHeader));
  REQUIRE(std::holds_alternative<RejectReason>(parsed));
  return std::get<RejectReason>(parsed);
}

}  // namespace

TEST_CASE("timestamps parse with any fraction width and format back") {
  const auto t = parse_timestamp("2011/08/10 09:46:53.000");
  REQUIRE(t);
  CHECK(format_timestamp(*t) == "2011/08/10 09:46:53");
  const auto micro = parse_timestamp("2011/08/10 09:46:53.123456");
  REQUIRE(micro);
  CHECK(micro->ns - t->ns == 123456000);
  CHECK(format_timestamp(*micro) == "2011/08/10 09:46:53.123456");
  const auto nano = parse_timestamp("2011/08/10 09:46:53.1234567891");
  REQUIRE(nano);
  CHECK(nano->ns - t->ns == 123456789);
  CHECK(seconds_between(*t, *parse_timestamp("2011/08/10 10:46:53")) == doctest::Approx(3600.0));
  CHECK_FALSE(parse_timestamp("2011-08-10 09:46:53"));
  CHECK_FALSE(parse_timestamp("2011/02/30 09:46:53"));
  CHECK_FALSE(parse_timestamp("2011/08/10 24:00:00"));
  CHECK_FALSE(parse_timestamp(""));
}

TEST_CASE("a typical row parses into all fields") {
  const auto r = parse_ok(
      "2011/08/10 09:46:53.000,3600,UDP,147.32.84.165,1025,<->,147.32.80.9,53,CON,0,0,2,214,81,"
      "flow=Background-UDP-Established");
  CHECK(r.dur == 3600.0);
  CHECK(r.proto == "udp");
  CHECK(r.dport == std::optional<std::string>("53"));
  CHECK(r.sport == std::optional<std::string>("1025"));
  CHECK(r.src_addr == "147.32.84.165");
  CHECK(r.tot_pkts == 2);
  CHECK(r.tot_bytes == 214);
  CHECK(r.src_bytes == 81);
  CHECK(r.s_tos == std::optional<int>(0));
  CHECK(r.label == "flow=Background-UDP-Established");
}

TEST_CASE("empty optional cells become absent and hex ports stay verbatim") {
  const auto r = parse_ok("2011/08/10 09:46:53.5,0.0,icmp,147.32.84.165,,->,147.32.80.9,0x0303,,,,1,60,60,flow=Background");
  CHECK_FALSE(r.sport);
  CHECK(r.dport == std::optional<std::string>("0x0303"));
  CHECK_FALSE(r.state);
  CHECK_FALSE(r.s_tos);
  CHECK_FALSE(r.d_tos);
}

TEST_CASE("columns are located through the header, extra columns ignored") {
  const std::string header =
      "Label,Extra,SrcBytes,TotBytes,TotPkts,dTos,sTos,State,Dport,DstAddr,Dir,Sport,SrcAddr,Proto,Dur,StartTime";
  const auto r = parse_ok("flow=From-Botnet-V42,zzz,60,120,2,0,0,S_RA,80,1.2.3.4,->,1025,10.0.0.1,tcp,1.5,2011/08/10 09:46:53",
                          header);
  CHECK(r.label == "flow=From-Botnet-V42");
  CHECK(r.dur == 1.5);
  CHECK(r.src_addr == "10.0.0.1");
  CHECK_THROWS_AS(build_header_map("StartTime,Dur,Proto"), Error);
}

TEST_CASE("malformed rows are rejected with a reason") {
  const std::string ok_tail = ",tcp,1.1.1.1,1,->,2.2.2.2,80,S,0,0,2,120,60,flow=Background";
  CHECK(parse_bad("2011/08/10 09:46:53,-1" + ok_tail) == RejectReason::negative_duration);
  CHECK(parse_bad("2011/08/10 09:46:53,abc" + ok_tail) == RejectReason::bad_duration);
  CHECK(parse_bad("10/08/2011 09:46:53,1" + ok_tail) == RejectReason::bad_timestamp);
  CHECK(parse_bad("2011/08/10 09:46:53,1,tcp,,1,->,2.2.2.2,80,S,0,0,2,120,60,flow=Background") ==
        RejectReason::missing_address);
  CHECK(parse_bad("2011/08/10 09:46:53,1,tcp,1.1.1.1,1,->,2.2.2.2,80,S,0,0,2,-5,60,flow=Background") ==
        RejectReason::bad_count);
  CHECK(parse_bad("2011/08/10 09:46:53,1,tcp,1.1.1.1,1,->,2.2.2.2,80,S,0,0,0,120,60,flow=Background") ==
        RejectReason::zero_packets);
  CHECK(parse_bad("2011/08/10 09:46:53,1,tcp,1.1.1.1,1,->,2.2.2.2,80,S,0,0,2,60,120,flow=Background") ==
        RejectReason::bytes_inconsistent);
  CHECK(parse_bad("2011/08/10 09:46:53,1,tcp") == RejectReason::short_row);
  CHECK(parse_bad("2011/08/10 09:46:53,1,tcp,1.1.1.1,1,->,2.2.2.2,80,S,0,0,2,120,60,Background") ==
        RejectReason::bad_label);
}

TEST_CASE("loading counts accepted and rejected rows") {
  set_warning_sink([](const std::string&) {});
  std::istringstream three(kHeader + "\n" +
                           "2011/08/10 09:46:53,1,tcp,1.1.1.1,1,->,2.2.2.2,80,S,0,0,2,120,60,flow=Background\n"
                           "2011/08/10 09:46:54,-1,tcp,1.1.1.1,1,->,2.2.2.2,80,S,0,0,2,120,60,flow=Background\n"
                           "2011/08/10 09:46:55,1,udp,1.1.1.1,1,->,2.2.2.2,53,S,0,0,2,120,60,flow=Background\n");
  const FlowTable t = read_flows(three, "three");
  CHECK(t.parse_stats.accepted == 2);
  CHECK(t.parse_stats.rejected == 1);
  CHECK(t.records.size() == 2);
  REQUIRE(t.parse_stats.first_rejections.size() == 1);
  CHECK(t.parse_stats.first_rejections[0].line == 3);
  CHECK(t.parse_stats.first_rejections[0].reason == RejectReason::negative_duration);

  std::istringstream header_only(kHeader + "\n");
  const FlowTable empty = read_flows(header_only, "empty");
  CHECK(empty.records.empty());
  CHECK(empty.parse_stats.rejected == 0);

  std::istringstream nothing("");
  CHECK_THROWS_AS(read_flows(nothing, "nothing"), Error);
  CHECK_THROWS_AS(load_scenario("/nonexistent/flows.binetflow"), Error);
  set_warning_sink({});
}

TEST_CASE("accepted records survive a CSV round trip unchanged") {
  SynthConfig cfg;
  cfg.n_background_flows = 3000;
  cfg.n_background_sources = 300;
  cfg.duration = 600;
  const FlowTable t = generate_scenario(cfg);
  const HeaderMap header = build_header_map(flow_csv_header());
  for (const auto& r : t.records) {
    auto parsed = parse_flow_record(to_csv_row(r), header);
    REQUIRE(std::holds_alternative<FlowRecord>(parsed));
    CHECK(std::get<FlowRecord>(parsed) == r);
  }
  FlowRecord odd = testing::flow(0.25);
  odd.sport.reset();
  odd.dport = "0x0008";
  odd.state.reset();
  odd.d_tos.reset();
  odd.label.clear();
  auto parsed = parse_flow_record(to_csv_row(odd), header);
  REQUIRE(std::holds_alternative<FlowRecord>(parsed));
  CHECK(std::get<FlowRecord>(parsed) == odd);
}

TEST_CASE("summary of a single record") {
  FlowTable t;
  FlowRecord r = testing::flow(0);
  r.tot_bytes = 60;
  r.src_bytes = 60;
  t.records.push_back(r);
  const SummaryStats s = summarize(t);
  CHECK(s.row_count == 1);
  const auto& bytes = *s.numeric[2].stats;
  CHECK(s.numeric[2].name == "TotBytes");
  CHECK(bytes.min == 60);
  CHECK(bytes.max == 60);
  CHECK(bytes.mean == 60);
  CHECK(bytes.median == 60);
  CHECK(bytes.std == 0);

  const SummaryStats none = summarize(FlowTable{});
  CHECK(none.row_count == 0);
  CHECK_FALSE(none.numeric[0].stats);
}

TEST_CASE("numeric statistics agree with a two-pass oracle") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  FlowTable t;
  std::vector<double> durs;
  for (int i = 0; i < 1000; ++i) {
    FlowRecord r = testing::flow(i);
    r.dur = std::round(u(rng) * 1e6) / 1e6;
    durs.push_back(r.dur);
    t.records.push_back(r);
  }
  const NumericStats s = *summarize(t).numeric[0].stats;
  CHECK(s.mean == doctest::Approx(oracle::mean(durs)).epsilon(1e-12));
  CHECK(s.std == doctest::Approx(oracle::pop_std(durs)).epsilon(1e-10));
  CHECK(s.median == doctest::Approx(oracle::median(durs)).epsilon(1e-12));
  CHECK(s.min <= s.median);
  CHECK(s.median <= s.q3);
  CHECK(s.q3 <= s.max);
  // uniform(0, 100): mean 50, sd 100/sqrt(12)
  const double se = 100.0 / std::sqrt(12.0) / std::sqrt(1000.0);
  CHECK(std::abs(s.mean - 50.0) < 3 * se);

  FlowTable shuffled = t;
  std::shuffle(shuffled.records.begin(), shuffled.records.end(), rng);
  const NumericStats p = *summarize(shuffled).numeric[0].stats;
  CHECK(p.median == s.median);
  CHECK(p.q3 == s.q3);
  CHECK(p.mean == doctest::Approx(s.mean).epsilon(1e-14));
}

TEST_CASE("quartiles interpolate between order statistics") {
  const NumericStats s = describe({1, 2, 3, 4});
  CHECK(s.median == 2.5);
  CHECK(s.q3 == 3.25);
  CHECK(s.std == doctest::Approx(std::sqrt(1.25)));
}

TEST_CASE("categorical summaries count absent values as their own category") {
  FlowTable t;
  for (int i = 0; i < 5; ++i) t.records.push_back(testing::flow(i));
  t.records[0].sport.reset();
  t.records[1].sport.reset();
  const SummaryStats s = summarize(t, 2);
  const auto it = std::find_if(s.categorical.begin(), s.categorical.end(), [](auto& c) { return c.name == "Sport"; });
  REQUIRE(it != s.categorical.end());
  CHECK(it->distinct == 2);
  REQUIRE(it->top.size() == 2);
  CHECK(it->top[0] == std::pair<std::string, std::size_t>{"1025", 3});
  CHECK(it->top[1] == std::pair<std::string, std::size_t>{std::string(kAbsentToken), 2});
}

#include "flowbot/report.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace flowbot {

namespace {

// Display width of a UTF-8 string: count code points, not bytes.
std::size_t width(const std::string& s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void add_summary(std::vector<std::string>& row, const Summary& s, bool with_std, ReportFormat fmt) {
  if (fmt == ReportFormat::csv) {
    row.push_back(format_rate(s.mean, fmt));
    row.push_back(format_rate(s.std, fmt));
  } else {
    row.push_back(with_std ? format_rate(s.mean, fmt) + "±" + format_rate(s.std, fmt) : format_rate(s.mean, fmt));
  }
}

void add_metric_columns(std::vector<std::string>& cols, const std::string& prefix, ReportFormat fmt) {
  for (const char* m : {"P", "R", "f1"}) {
    cols.push_back(prefix + m);
    if (fmt == ReportFormat::csv) cols.push_back(prefix + m + "_std");
  }
}

}  // namespace

std::string_view to_string(ReportFormat f) { return f == ReportFormat::text ? "text" : "csv"; }

ReportFormat parse_report_format(std::string_view s) {
  if (s == "text") return ReportFormat::text;
  if (s == "csv") return ReportFormat::csv;
  throw Error("unknown report format '" + std::string(s) + "'");
}

std::string format_rate(double v, ReportFormat fmt) { return fmt == ReportFormat::csv ? format_double(v) : fixed(v, 3); }

void Table::add(std::vector<std::string> row) {
  if (row.size() != columns.size()) throw Error("table row has " + std::to_string(row.size()) + " cells, expected " +
                                                std::to_string(columns.size()));
  rows.push_back(std::move(row));
}

void write_table(std::ostream& out, const Table& t, ReportFormat fmt) {
  if (fmt == ReportFormat::csv) {
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_cell(cells[i]);
      out << '\n';
    };
    line(t.columns);
    for (const auto& r : t.rows) line(r);
    return;
  }
  std::vector<std::size_t> w(t.columns.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = width(t.columns[i]);
  for (const auto& r : t.rows)
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::max(w[i], width(r[i]));
  auto line = [&](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) s += "  ";
      // first column left-aligned, numbers right-aligned
      const std::string pad(w[i] - width(cells[i]), ' ');
      s += i == 0 ? cells[i] + pad : pad + cells[i];
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    out << s << '\n';
  };
  line(t.columns);
  std::size_t total = 0;
  for (auto x : w) total += x;
  out << std::string(total + 2 * (w.size() - 1), '-') << '\n';
  for (const auto& r : t.rows) line(r);
}

void write_config_header(std::ostream& out, const std::string& command, const ConfigLines& config) {
  out << "# flowbot " << command << '\n';
  for (const auto& [k, v] : config) out << "# " << k << ": " << v << '\n';
}

ResultRow result_row(std::string name, const Dataset& ds, const RepeatedMetrics& m) {
  ResultRow r;
  r.name = std::move(name);
  r.botnet = ds.positives();
  r.size = static_cast<std::size_t>(ds.rows());
  r.runs = static_cast<int>(m.runs.size());
  r.train_precision = m.train_precision;
  r.train_recall = m.train_recall;
  r.train_f1 = m.train_f1;
  r.precision = m.precision;
  r.recall = m.recall;
  r.f1 = m.f1;
  return r;
}

ResultRow result_row(std::string name, const Dataset& ds, const Metrics& train, const Metrics& test) {
  return result_row(std::move(name), ds, aggregate({train}, {test}));
}

Table result_table(const std::vector<ResultRow>& rows, ReportFormat fmt) {
  Table t;
  t.columns = {"Scenario", "Botnet", "Size", "Botnet‰", "Runs"};
  add_metric_columns(t.columns, "train_", fmt);
  add_metric_columns(t.columns, "test_", fmt);
  for (const auto& r : rows) {
    std::vector<std::string> cells{r.name, std::to_string(r.botnet), std::to_string(r.size),
                                   fmt == ReportFormat::csv ? format_double(r.botnet_permille())
                                                            : fixed(r.botnet_permille(), 2),
                                   std::to_string(r.runs)};
    const bool with_std = r.runs > 1;
    for (const Summary* s : {&r.train_precision, &r.train_recall, &r.train_f1, &r.precision, &r.recall, &r.f1})
      add_summary(cells, *s, with_std, fmt);
    t.add(std::move(cells));
  }
  return t;
}

Table run_table(const RepeatedMetrics& m, ReportFormat fmt) {
  Table t;
  t.columns = {"run", "tp", "fp", "fn", "tn", "P", "R", "f1"};
  for (std::size_t i = 0; i < m.runs.size(); ++i) {
    const auto& x = m.runs[i];
    t.add({std::to_string(i), std::to_string(x.tp), std::to_string(x.fp), std::to_string(x.fn), std::to_string(x.tn),
           format_rate(x.precision, fmt), format_rate(x.recall, fmt), format_rate(x.f1, fmt)});
  }
  return t;
}

Table sweep_table(const SweepResult& r, ReportFormat fmt) {
  Table t;
  t.columns = {"params", "best"};
  add_metric_columns(t.columns, "test_", fmt);
  t.columns.push_back("error");
  for (std::size_t g = 0; g < r.entries.size(); ++g) {
    const auto& e = r.entries[g];
    std::vector<std::string> cells{e.label.empty() ? "(defaults)" : e.label, r.best == g ? "*" : ""};
    if (e.result) {
      const bool with_std = e.result->runs.size() > 1;
      for (const Summary* s : {&e.result->precision, &e.result->recall, &e.result->f1}) add_summary(cells, *s, with_std, fmt);
    } else {
      cells.resize(cells.size() + (fmt == ReportFormat::csv ? 6 : 3), "");
    }
    cells.push_back(e.error);
    t.add(std::move(cells));
  }
  return t;
}

}  // namespace flowbot

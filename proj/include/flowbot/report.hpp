#pragma once

#include "flowbot/evaluation.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace flowbot {

enum class ReportFormat { text, csv };

std::string_view to_string(ReportFormat f);
ReportFormat parse_report_format(std::string_view s);

/// Plain table of preformatted cells, rendered as aligned text or CSV.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
};

void write_table(std::ostream& out, const Table& t, ReportFormat fmt);

using ConfigLines = std::vector<std::pair<std::string, std::string>>;

/// "# key: value" lines, so every report carries the settings that produced it.
void write_config_header(std::ostream& out, const std::string& command, const ConfigLines& config);

/// One line of a result table: class balance of the evaluated data and the
/// train/test metrics (mean and population std over runs).
struct ResultRow {
  std::string name;
  std::size_t botnet = 0;
  std::size_t size = 0;
  int runs = 1;
  Summary train_precision, train_recall, train_f1;
  Summary precision, recall, f1;

  double botnet_permille() const { return size ? 1000.0 * static_cast<double>(botnet) / static_cast<double>(size) : 0.0; }
};

ResultRow result_row(std::string name, const Dataset& ds, const RepeatedMetrics& m);
ResultRow result_row(std::string name, const Dataset& ds, const Metrics& train, const Metrics& test);

/// Columns Botnet, Size, Botnet‰, then P/R/f1 for train and test. Text output
/// rounds to three decimals and appends "±std" when runs > 1; CSV keeps full
/// precision in separate std columns.
Table result_table(const std::vector<ResultRow>& rows, ReportFormat fmt);

/// Per-run confusion counts and rates.
Table run_table(const RepeatedMetrics& m, ReportFormat fmt);

/// One line per grid point; the best point is flagged with '*'.
Table sweep_table(const SweepResult& r, ReportFormat fmt);

/// Fixed three decimals for text, shortest round-trip for CSV.
std::string format_rate(double v, ReportFormat fmt);

}  // namespace flowbot

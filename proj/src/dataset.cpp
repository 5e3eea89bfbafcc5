#include "flowbot/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>

namespace flowbot {

std::size_t Dataset::positives() const { return static_cast<std::size_t>((labels.array() == 1).count()); }

void Dataset::validate() const {
  if (features.rows() != labels.size()) throw Error("dataset: feature rows and labels differ in length");
  if (static_cast<Eigen::Index>(feature_names.size()) != features.cols())
    throw Error("dataset: feature name count does not match column count");
  if (!keys.empty() && static_cast<Eigen::Index>(keys.size()) != features.rows())
    throw Error("dataset: row key count does not match row count");
  for (Eigen::Index i = 0; i < labels.size(); ++i)
    if (labels[i] != 0 && labels[i] != 1) throw Error("dataset: labels must be 0 or 1");
}

Dataset make_dataset(Matrix features, Labels labels, std::vector<std::string> names) {
  Dataset ds;
  ds.features = std::move(features);
  ds.labels = std::move(labels);
  if (names.empty())
    for (Eigen::Index j = 0; j < ds.features.cols(); ++j) names.push_back("f" + std::to_string(j));
  ds.feature_names = std::move(names);
  ds.keys.resize(static_cast<std::size_t>(ds.features.rows()));
  for (std::size_t i = 0; i < ds.keys.size(); ++i) ds.keys[i].window_index = i;
  ds.validate();
  return ds;
}

Dataset select_rows(const Dataset& ds, std::span<const Eigen::Index> rows) {
  Dataset out;
  out.feature_names = ds.feature_names;
  out.meta = ds.meta;
  const auto n = static_cast<Eigen::Index>(rows.size());
  out.features.resize(n, ds.cols());
  out.labels.resize(n);
  const bool has_keys = !ds.keys.empty();
  if (has_keys) out.keys.reserve(rows.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index r = rows[static_cast<std::size_t>(i)];
    out.features.row(i) = ds.features.row(r);
    out.labels[i] = ds.labels[r];
    if (has_keys) out.keys.push_back(ds.keys[static_cast<std::size_t>(r)]);
  }
  return out;
}

Dataset select_columns(const Dataset& ds, std::span<const Eigen::Index> cols) {
  Dataset out;
  out.labels = ds.labels;
  out.keys = ds.keys;
  out.meta = ds.meta;
  out.features.resize(ds.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] < 0 || cols[j] >= ds.cols()) throw Error("select_columns: column index out of range");
    out.features.col(static_cast<Eigen::Index>(j)) = ds.features.col(cols[j]);
    out.feature_names.push_back(ds.feature_names[static_cast<std::size_t>(cols[j])]);
  }
  return out;
}

void write_feature_csv(std::ostream& out, const Dataset& ds) {
  out << "window_index,src_addr,label";
  for (const auto& name : ds.feature_names) out << ',' << name;
  out << '\n';
  std::string line;
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    line.clear();
    if (ds.keys.empty()) {
      line += std::to_string(i);
      line += ',';
    } else {
      const auto& key = ds.keys[static_cast<std::size_t>(i)];
      line += std::to_string(key.window_index);
      line += ',';
      line += key.src_addr;
    }
    line += ',';
    line += std::to_string(ds.labels[i]);
    for (Eigen::Index j = 0; j < ds.cols(); ++j) {
      line += ',';
      line += format_double(ds.features(i, j));
    }
    line += '\n';
    out << line;
  }
}

void save_feature_csv(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  write_feature_csv(out, ds);
  if (!out) throw Error("write failed for '" + path + "'");
}

Dataset read_feature_csv(std::istream& in, const std::string& source_name) {
  std::string line;
  if (!std::getline(in, line)) throw Error(source_name + ": missing header row");
  const auto header = split_view(trim(line), ',');
  if (header.size() < 4 || trim(header[0]) != "window_index" || trim(header[1]) != "src_addr" ||
      trim(header[2]) != "label")
    throw Error(source_name + ": header must start with window_index,src_addr,label and name at least one feature");

  Dataset ds;
  for (std::size_t j = 3; j < header.size(); ++j) ds.feature_names.emplace_back(trim(header[j]));
  const std::size_t d = ds.feature_names.size();

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_view(trim(line), ',');
    auto fail = [&](const std::string& what) {
      return Error(source_name + ":" + std::to_string(line_no) + ": " + what);
    };
    if (cells.size() != d + 3) throw fail("expected " + std::to_string(d + 3) + " cells");
    RowKey key;
    if (!parse_uint(cells[0], key.window_index)) throw fail("bad window_index");
    key.src_addr = std::string(trim(cells[1]));
    std::uint64_t label = 0;
    if (!parse_uint(cells[2], label) || label > 1) throw fail("label must be 0 or 1");
    for (std::size_t j = 0; j < d; ++j) {
      double v = 0;
      if (!parse_double(cells[3 + j], v)) throw fail("bad value for " + ds.feature_names[j]);
      values.push_back(v);
    }
    labels.push_back(static_cast<int>(label));
    ds.keys.push_back(std::move(key));
  }
  const auto n = static_cast<Eigen::Index>(labels.size());
  ds.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), n, static_cast<Eigen::Index>(d));
  ds.labels = Eigen::Map<const Labels>(labels.data(), n);
  ds.meta.scenario = std::filesystem::path(source_name).stem().string();
  return ds;
}

Dataset load_feature_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open feature file '" + path + "'");
  return read_feature_csv(in, path);
}

}  // namespace flowbot

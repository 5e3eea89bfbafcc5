#pragma once

#include "flowbot/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace flowbot {

/// Identifies the (time window, source address) group a feature row came from.
struct RowKey {
  std::uint64_t window_index = 0;
  std::string src_addr;
  bool operator==(const RowKey&) const = default;
};

struct DatasetMeta {
  std::string scenario;
  double window_width = 0;   // seconds; 0 when not built from windows
  double window_stride = 0;
};

/// Feature matrix (one row per sample) with binary labels.
struct Dataset {
  Matrix features;
  Labels labels;
  std::vector<std::string> feature_names;
  std::vector<RowKey> keys;
  DatasetMeta meta;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index cols() const { return features.cols(); }
  std::size_t positives() const;

  /// Throws Error when shapes disagree or labels are not in {0,1}.
  void validate() const;
};

/// Wraps a bare matrix/label pair with generated names f0..f{d-1}.
Dataset make_dataset(Matrix features, Labels labels, std::vector<std::string> names = {});

Dataset select_rows(const Dataset& ds, std::span<const Eigen::Index> rows);
Dataset select_columns(const Dataset& ds, std::span<const Eigen::Index> cols);

/// Header `window_index,src_addr,label,<feature names>`; floats use the
/// shortest exact round-trip representation.
void write_feature_csv(std::ostream& out, const Dataset& ds);
void save_feature_csv(const std::string& path, const Dataset& ds);
Dataset read_feature_csv(std::istream& in, const std::string& source_name);
Dataset load_feature_csv(const std::string& path);

}  // namespace flowbot

#pragma once

// Shared by the unit tests and the acceptance binary: dataset builders and a
// deliberately naive estimator written without library helpers.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "abe/abe.hpp"

#ifndef ABE_DATA_DIR
#define ABE_DATA_DIR "data"
#endif

namespace abe::testing {

inline std::string data_path(const std::string& rel) { return std::string(ABE_DATA_DIR) + "/" + rel; }

// Already-standardized numeric dataset.
inline StandardizedDataset numeric_dataset(const std::vector<std::vector<double>>& rows,
                                           const std::vector<double>& efforts, const std::string& name = "t") {
  const std::size_t m = rows.at(0).size();
  std::vector<FeatureSpec> features;
  std::vector<std::vector<std::string>> labels(m);
  std::vector<ColumnRange> ranges(m, {0.0, 1.0});
  for (std::size_t j = 0; j < m; ++j) features.push_back({"f" + std::to_string(j + 1), FeatureKind::Numeric, FeatureRole::Input});
  std::vector<double> values;
  for (const auto& r : rows) values.insert(values.end(), r.begin(), r.end());
  return StandardizedDataset(name, features, labels, values, efforts, ranges);
}

inline Dataset csv_dataset(const std::string& text, const Schema& schema, const std::string& name = "t") {
  std::istringstream in(text);
  return parse_dataset(in, schema, name);
}

inline StandardizedDataset load_standard(const std::string& rel, const std::string& effort,
                                         std::vector<std::string> categorical = {},
                                         std::vector<std::string> excluded = {}) {
  Schema s{effort, std::move(categorical), std::move(excluded)};
  return standardize(preprocess(load_dataset(data_path(rel), s)));
}

// Straight transcription of retrieval + adaptation + ordered weighted mean:
// recomputes every distance, sorts (distance, index) pairs, weights rank r of
// k by 2^(k-r) / (2^k - 1). Numeric features only.
inline double naive_predict(const std::vector<std::vector<double>>& train, const std::vector<double>& efforts,
                            const std::vector<double>& target, std::size_t k, const std::vector<int>& mask,
                            const std::vector<std::vector<double>>& weights) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < train.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < target.size(); ++j) s += (train[i][j] - target[j]) * (train[i][j] - target[j]);
    d.emplace_back(std::sqrt(s), i);
  }
  std::sort(d.begin(), d.end());
  const double m = static_cast<double>(target.size());
  const double denom = std::pow(2.0, static_cast<double>(k)) - 1.0;
  double out = 0.0;
  for (std::size_t r = 1; r <= k; ++r) {
    const std::size_t idx = d[r - 1].second;
    double adj = efforts[idx];
    for (std::size_t j = 0; j < target.size(); ++j) adj += weights[r - 1][j] * mask[j] * (target[j] - train[idx][j]) / m;
    out += std::pow(2.0, static_cast<double>(k - r)) / denom * adj;
  }
  return std::max(out, 1e-6);
}

inline std::vector<std::vector<double>> rows_of(const StandardizedDataset& ds) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < ds.size(); ++i) rows.emplace_back(ds.row(i).begin(), ds.row(i).end());
  return rows;
}

inline std::vector<int> mask_bits(std::uint64_t v, std::size_t m) {
  std::vector<int> bits(m);
  for (std::size_t j = 0; j < m; ++j) bits[j] = static_cast<int>((v >> (m - 1 - j)) & 1u);
  return bits;
}

}  // namespace abe::testing

#pragma once

// Dataset model, CSV ingestion, preprocessing and min-max standardization.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "abe/error.hpp"

namespace abe {

inline constexpr std::size_t kMaxInputFeatures = 63;
inline constexpr std::size_t kMinProjects = 3;

enum class FeatureKind { Numeric, Categorical };
enum class FeatureRole { Input, Effort, Excluded };

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::Numeric;
  FeatureRole role = FeatureRole::Input;

  bool operator==(const FeatureSpec&) const = default;
};

struct Missing {
  bool operator==(const Missing&) const = default;
};

// Interned categorical label; the text lives in the owning dataset.
struct Category {
  std::uint32_t id = 0;
  bool operator==(const Category&) const = default;
};

using Cell = std::variant<Missing, double, Category>;

struct Project {
  std::vector<Cell> values;  // aligned with Dataset::specs()

  bool has_missing() const {
    return std::any_of(values.begin(), values.end(),
                       [](const Cell& c) { return std::holds_alternative<Missing>(c); });
  }
  bool operator==(const Project&) const = default;
};

// Column roles by header name. Columns not listed are Input; their kind is
// Numeric unless a non-missing cell fails to parse as a number.
struct Schema {
  std::string effort_column;
  std::vector<std::string> categorical_columns;
  std::vector<std::string> excluded_columns;
};

class Dataset {
 public:
  Dataset(std::string name, std::vector<FeatureSpec> specs, std::vector<std::vector<std::string>> labels,
          std::vector<Project> projects)
      : name_(std::move(name)), specs_(std::move(specs)), labels_(std::move(labels)), projects_(std::move(projects)) {
    validate();
  }

  const std::string& name() const noexcept { return name_; }
  const std::vector<FeatureSpec>& specs() const noexcept { return specs_; }
  const std::vector<Project>& projects() const noexcept { return projects_; }
  std::size_t size() const noexcept { return projects_.size(); }
  std::size_t effort_column() const noexcept { return effort_column_; }

  std::size_t input_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(specs_.begin(), specs_.end(),
                                                  [](const FeatureSpec& s) { return s.role == FeatureRole::Input; }));
  }

  // Label dictionary of column j (empty for numeric columns).
  const std::vector<std::string>& labels(std::size_t j) const { return labels_.at(j); }
  const std::vector<std::vector<std::string>>& all_labels() const noexcept { return labels_; }

  std::optional<double> effort(std::size_t i) const {
    const Cell& c = projects_.at(i).values[effort_column_];
    if (const double* v = std::get_if<double>(&c)) return *v;
    return std::nullopt;
  }

  bool operator==(const Dataset&) const = default;

 private:
  void validate() {
    std::set<std::string> names;
    std::size_t efforts = 0;
    for (std::size_t j = 0; j < specs_.size(); ++j) {
      const FeatureSpec& s = specs_[j];
      if (!names.insert(s.name).second) throw SchemaError("duplicate feature name '" + s.name + "'");
      if (s.role == FeatureRole::Effort) {
        if (s.kind != FeatureKind::Numeric) throw SchemaError("effort feature '" + s.name + "' must be numeric");
        effort_column_ = j;
        ++efforts;
      }
    }
    if (efforts != 1) throw SchemaError("dataset must have exactly one effort feature, found " + std::to_string(efforts));
    const std::size_t m = input_count();
    if (m < 1 || m > kMaxInputFeatures)
      throw SchemaError("input feature count must be in [1, 63], got " + std::to_string(m));

    labels_.resize(specs_.size());
    for (std::size_t i = 0; i < projects_.size(); ++i) {
      const Project& p = projects_[i];
      if (p.values.size() != specs_.size())
        throw SchemaError("project " + std::to_string(i) + " has " + std::to_string(p.values.size()) +
                          " values, expected " + std::to_string(specs_.size()));
      for (std::size_t j = 0; j < specs_.size(); ++j) {
        const Cell& c = p.values[j];
        if (std::holds_alternative<Missing>(c)) continue;
        if (specs_[j].kind == FeatureKind::Numeric) {
          const double* v = std::get_if<double>(&c);
          if (v == nullptr || !std::isfinite(*v))
            throw SchemaError("project " + std::to_string(i) + ": numeric feature '" + specs_[j].name +
                              "' holds a non-numeric value");
        } else {
          const Category* cat = std::get_if<Category>(&c);
          if (cat == nullptr || cat->id >= labels_[j].size())
            throw SchemaError("project " + std::to_string(i) + ": categorical feature '" + specs_[j].name +
                              "' holds an unknown label");
        }
      }
      if (auto e = effort(i); e && !(*e > 0.0))
        throw SchemaError("project " + std::to_string(i) + ": effort must be positive");
    }
  }

  std::string name_;
  std::vector<FeatureSpec> specs_;
  std::vector<std::vector<std::string>> labels_;
  std::vector<Project> projects_;
  std::size_t effort_column_ = 0;
};

struct ColumnRange {
  double min = 0.0;
  double max = 0.0;
  bool operator==(const ColumnRange&) const = default;
};

// A project as seen by the estimators: standardized input features
// (categoricals as label ids) plus its raw effort.
struct ProjectView {
  std::span<const double> features;
  double effort = 0.0;
};

// Input features only, numeric columns scaled to [0, 1]. Immutable.
class StandardizedDataset {
 public:
  StandardizedDataset(std::string name, std::vector<FeatureSpec> features, std::vector<std::vector<std::string>> labels,
                      std::vector<double> values, std::vector<double> efforts, std::vector<ColumnRange> ranges)
      : name_(std::move(name)),
        features_(std::move(features)),
        labels_(std::move(labels)),
        values_(std::move(values)),
        efforts_(std::move(efforts)),
        ranges_(std::move(ranges)) {
    const std::size_t m = features_.size();
    if (m < 1 || m > kMaxInputFeatures) throw SchemaError("input feature count must be in [1, 63]");
    if (efforts_.empty()) throw InsufficientDataError("standardized dataset has no projects");
    if (values_.size() != m * efforts_.size() || ranges_.size() != m || labels_.size() != m)
      throw InvalidArgument("standardized dataset components have inconsistent shapes");
    for (double e : efforts_)
      if (!(e > 0.0) || !std::isfinite(e)) throw InvalidArgument("effort must be positive and finite");
    kinds_.reserve(m);
    for (const FeatureSpec& f : features_) kinds_.push_back(f.kind);
  }

  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return efforts_.size(); }
  std::size_t feature_count() const noexcept { return features_.size(); }
  const std::vector<FeatureSpec>& features() const noexcept { return features_; }
  std::span<const FeatureKind> kinds() const noexcept { return kinds_; }
  const std::vector<ColumnRange>& ranges() const noexcept { return ranges_; }
  const std::vector<std::string>& labels(std::size_t j) const { return labels_.at(j); }
  std::span<const double> efforts() const noexcept { return efforts_; }
  double effort(std::size_t i) const { return efforts_.at(i); }

  std::span<const double> row(std::size_t i) const {
    const std::size_t m = feature_count();
    return std::span<const double>(values_).subspan(i * m, m);
  }

  ProjectView project(std::size_t i) const { return {row(i), efforts_.at(i)}; }

  // Same dataset restricted to the given rows, in the given order. Scaling
  // ranges are inherited, not recomputed.
  StandardizedDataset select(std::span<const std::size_t> rows) const {
    const std::size_t m = feature_count();
    std::vector<double> values;
    std::vector<double> efforts;
    values.reserve(rows.size() * m);
    efforts.reserve(rows.size());
    for (std::size_t r : rows) {
      if (r >= size()) throw BoundsError("row index out of range");
      auto src = row(r);
      values.insert(values.end(), src.begin(), src.end());
      efforts.push_back(efforts_[r]);
    }
    return {name_, features_, labels_, std::move(values), std::move(efforts), ranges_};
  }

  // Leave-one-out training set: every row except `held_out`.
  StandardizedDataset without(std::size_t held_out) const {
    std::vector<std::size_t> rows;
    rows.reserve(size());
    for (std::size_t i = 0; i < size(); ++i)
      if (i != held_out) rows.push_back(i);
    return select(rows);
  }

  bool operator==(const StandardizedDataset& o) const {
    return name_ == o.name_ && features_ == o.features_ && labels_ == o.labels_ && values_ == o.values_ &&
           efforts_ == o.efforts_ && ranges_ == o.ranges_;
  }

 private:
  std::string name_;
  std::vector<FeatureSpec> features_;
  std::vector<std::vector<std::string>> labels_;
  std::vector<double> values_;  // row-major n x m
  std::vector<double> efforts_;
  std::vector<ColumnRange> ranges_;
  std::vector<FeatureKind> kinds_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

inline bool is_missing_token(std::string_view s) { return s.empty() || s == "?"; }

inline std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based file line of each row
};

inline RawTable read_table(std::istream& in) {
  RawTable t;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size())
      throw ParseError(line_no, std::min(cells.size(), t.header.size()) + 1,
                       "expected " + std::to_string(t.header.size()) + " values, found " + std::to_string(cells.size()));
    t.rows.push_back(std::move(cells));
    t.line_numbers.push_back(line_no);
  }
  if (!have_header) throw SchemaError("CSV input has no header line");
  return t;
}

inline Dataset build_dataset(const RawTable& t, const std::vector<FeatureSpec>& specs, std::string name) {
  const std::size_t cols = specs.size();
  std::vector<std::vector<std::string>> labels(cols);
  std::vector<std::unordered_map<std::string, std::uint32_t>> intern(cols);
  std::vector<Project> projects;
  projects.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    Project p;
    p.values.reserve(cols);
    for (std::size_t j = 0; j < cols; ++j) {
      const std::string& raw = t.rows[r][j];
      if (is_missing_token(raw)) {
        p.values.emplace_back(Missing{});
      } else if (specs[j].kind == FeatureKind::Numeric) {
        auto v = parse_number(raw);
        if (!v) throw ParseError(t.line_numbers[r], j + 1, "cannot parse '" + raw + "' as a number");
        if (specs[j].role == FeatureRole::Effort && !(*v > 0.0))
          throw ParseError(t.line_numbers[r], j + 1, "effort must be positive, got '" + raw + "'");
        p.values.emplace_back(*v);
      } else {
        auto [it, inserted] = intern[j].try_emplace(raw, static_cast<std::uint32_t>(labels[j].size()));
        if (inserted) labels[j].push_back(raw);
        p.values.emplace_back(Category{it->second});
      }
    }
    projects.push_back(std::move(p));
  }
  return Dataset(std::move(name), specs, std::move(labels), std::move(projects));
}

inline void check_unique_header(const std::vector<std::string>& header) {
  std::set<std::string> seen;
  for (const auto& h : header) {
    if (h.empty()) throw SchemaError("empty column name in header");
    if (!seen.insert(h).second) throw SchemaError("duplicate column name '" + h + "' in header");
  }
}

}  // namespace detail

// Parses CSV text; feature kinds and roles come from `schema` plus the data.
inline Dataset parse_dataset(std::istream& in, const Schema& schema, std::string name) {
  const detail::RawTable t = detail::read_table(in);
  detail::check_unique_header(t.header);

  auto has_column = [&](const std::string& c) {
    return std::find(t.header.begin(), t.header.end(), c) != t.header.end();
  };
  if (schema.effort_column.empty() || !has_column(schema.effort_column))
    throw SchemaError("effort column '" + schema.effort_column + "' not found in header");
  for (const auto& c : schema.categorical_columns)
    if (!has_column(c)) throw SchemaError("categorical column '" + c + "' not found in header");
  for (const auto& c : schema.excluded_columns)
    if (!has_column(c)) throw SchemaError("excluded column '" + c + "' not found in header");

  auto listed = [](const std::vector<std::string>& v, const std::string& c) {
    return std::find(v.begin(), v.end(), c) != v.end();
  };

  std::vector<FeatureSpec> specs;
  specs.reserve(t.header.size());
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    FeatureSpec s{t.header[j], FeatureKind::Numeric, FeatureRole::Input};
    if (t.header[j] == schema.effort_column) {
      s.role = FeatureRole::Effort;
    } else {
      if (listed(schema.excluded_columns, s.name)) s.role = FeatureRole::Excluded;
      bool numeric = !listed(schema.categorical_columns, s.name);
      for (std::size_t r = 0; numeric && r < t.rows.size(); ++r) {
        const std::string& cell = t.rows[r][j];
        if (!detail::is_missing_token(cell) && !detail::parse_number(cell)) numeric = false;
      }
      s.kind = numeric ? FeatureKind::Numeric : FeatureKind::Categorical;
    }
    specs.push_back(std::move(s));
  }
  return detail::build_dataset(t, specs, std::move(name));
}

// Parses CSV text against an explicit feature list; header names must match.
inline Dataset parse_dataset(std::istream& in, const std::vector<FeatureSpec>& specs, std::string name) {
  const detail::RawTable t = detail::read_table(in);
  detail::check_unique_header(t.header);
  if (t.header.size() != specs.size())
    throw SchemaError("header has " + std::to_string(t.header.size()) + " columns, schema declares " +
                      std::to_string(specs.size()));
  for (std::size_t j = 0; j < specs.size(); ++j)
    if (t.header[j] != specs[j].name)
      throw SchemaError("header column " + std::to_string(j + 1) + " is '" + t.header[j] + "', schema expects '" +
                        specs[j].name + "'");
  return detail::build_dataset(t, specs, std::move(name));
}

template <class SchemaLike>
Dataset load_dataset(const std::filesystem::path& path, const SchemaLike& schema, std::string name = {}) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open dataset file '" + path.string() + "'");
  if (name.empty()) name = path.stem().string();
  return parse_dataset(in, schema, std::move(name));
}

// Drops Excluded features, then every project with a missing value.
inline Dataset preprocess(const Dataset& ds) {
  std::vector<std::size_t> keep;
  std::vector<FeatureSpec> specs;
  std::vector<std::vector<std::string>> labels;
  for (std::size_t j = 0; j < ds.specs().size(); ++j) {
    if (ds.specs()[j].role == FeatureRole::Excluded) continue;
    keep.push_back(j);
    specs.push_back(ds.specs()[j]);
    labels.push_back(ds.labels(j));
  }
  std::vector<Project> projects;
  for (const Project& p : ds.projects()) {
    Project q;
    q.values.reserve(keep.size());
    for (std::size_t j : keep) q.values.push_back(p.values[j]);
    if (!q.has_missing()) projects.push_back(std::move(q));
  }
  if (projects.size() < kMinProjects)
    throw InsufficientDataError("dataset '" + ds.name() + "' has " + std::to_string(projects.size()) +
                                " complete projects, at least 3 required");
  return Dataset(ds.name(), std::move(specs), std::move(labels), std::move(projects));
}

// Min-max scales numeric inputs; a constant column maps to 0. Categorical
// inputs keep their label ids, effort stays in raw units.
inline StandardizedDataset standardize(const Dataset& ds) {
  if (ds.size() < kMinProjects)
    throw InsufficientDataError("dataset '" + ds.name() + "' needs at least 3 projects");
  std::vector<std::size_t> inputs;
  std::vector<FeatureSpec> features;
  std::vector<std::vector<std::string>> labels;
  for (std::size_t j = 0; j < ds.specs().size(); ++j) {
    const FeatureSpec& s = ds.specs()[j];
    if (s.role == FeatureRole::Excluded) throw InvalidArgument("standardize: excluded features present, preprocess first");
    if (s.role != FeatureRole::Input) continue;
    inputs.push_back(j);
    features.push_back(s);
    labels.push_back(ds.labels(j));
  }
  const std::size_t n = ds.size();
  const std::size_t m = inputs.size();

  std::vector<ColumnRange> ranges(m);
  std::vector<double> values(n * m);
  std::vector<double> efforts(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (ds.projects()[i].has_missing()) throw InvalidArgument("standardize: missing values present, preprocess first");
    efforts[i] = *ds.effort(i);
  }
  for (std::size_t c = 0; c < m; ++c) {
    const std::size_t j = inputs[c];
    if (features[c].kind == FeatureKind::Categorical) {
      for (std::size_t i = 0; i < n; ++i) values[i * m + c] = std::get<Category>(ds.projects()[i].values[j]).id;
      continue;
    }
    double lo = std::get<double>(ds.projects()[0].values[j]);
    double hi = lo;
    for (std::size_t i = 1; i < n; ++i) {
      const double v = std::get<double>(ds.projects()[i].values[j]);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    ranges[c] = {lo, hi};
    const double span = hi - lo;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = std::get<double>(ds.projects()[i].values[j]);
      values[i * m + c] = span > 0.0 ? std::clamp((v - lo) / span, 0.0, 1.0) : 0.0;
    }
  }
  return {ds.name(), std::move(features), std::move(labels), std::move(values), std::move(efforts), std::move(ranges)};
}

}  // namespace abe

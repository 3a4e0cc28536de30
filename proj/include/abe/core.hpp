#pragma once

// Analogy retrieval, the adaptation rule and the aggregation rules.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "abe/data.hpp"
#include "abe/error.hpp"

namespace abe {

// Predictions are floored here before any ratio or log metric.
inline constexpr double kEffortFloor = 1e-6;

struct Neighbor {
  std::size_t index = 0;  // into the training set it was retrieved from
  double distance = 0.0;
  std::size_t rank = 0;  // 1 = nearest

  bool operator==(const Neighbor&) const = default;
};

// Which input features take part in adaptation. Feature j (0-based, left to
// right) corresponds to bit (width - 1 - j) of the integer encoding.
class FeatureMask {
 public:
  FeatureMask() = default;

  static FeatureMask from_integer(std::uint64_t v, std::size_t width) {
    if (width < 1 || width > kMaxInputFeatures) throw InvalidArgument("feature mask width must be in [1, 63]");
    if (v < 1 || v > max_value(width))
      throw InvalidArgument("feature mask value " + std::to_string(v) + " outside [1, 2^" + std::to_string(width) +
                            " - 1]");
    FeatureMask mask;
    mask.bits_ = v;
    mask.width_ = width;
    return mask;
  }

  static FeatureMask all(std::size_t width) { return from_integer(max_value(width), width); }

  static FeatureMask from_bits(const std::vector<bool>& bits) {
    std::uint64_t v = 0;
    for (bool b : bits) v = (v << 1) | (b ? 1u : 0u);
    return from_integer(v, bits.size());
  }

  static constexpr std::uint64_t max_value(std::size_t width) { return (std::uint64_t{1} << width) - 1; }

  bool test(std::size_t j) const { return ((bits_ >> (width_ - 1 - j)) & 1u) != 0; }
  bool operator[](std::size_t j) const { return test(j); }
  std::size_t width() const noexcept { return width_; }
  std::uint64_t value() const noexcept { return bits_; }
  std::size_t count() const noexcept { return static_cast<std::size_t>(std::popcount(bits_)); }

  std::vector<bool> bits() const {
    std::vector<bool> out(width_);
    for (std::size_t j = 0; j < width_; ++j) out[j] = test(j);
    return out;
  }

  std::string to_string() const {
    std::string s(width_, '0');
    for (std::size_t j = 0; j < width_; ++j)
      if (test(j)) s[j] = '1';
    return s;
  }

  bool operator==(const FeatureMask&) const = default;

 private:
  std::uint64_t bits_ = 1;
  std::size_t width_ = 1;
};

// Row-major rank x feature weight matrix.
class WeightMatrix {
 public:
  WeightMatrix() = default;
  WeightMatrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  WeightMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw InvalidArgument("weight matrix data has the wrong size");
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const double> row(std::size_t r) const { return std::span<const double>(data_).subspan(r * cols_, cols_); }
  std::span<double> row(std::size_t r) { return std::span<double>(data_).subspan(r * cols_, cols_); }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> data() const noexcept { return data_; }

  bool operator==(const WeightMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// The tuned decision triple: analogy count, feature mask, weight matrix.
// Row i of `weights` adapts the rank-(i+1) analogy.
struct SolutionVector {
  std::size_t k = 1;
  FeatureMask mask;
  WeightMatrix weights;

  bool operator==(const SolutionVector&) const = default;
};

// Euclidean distance over all inputs; a categorical feature contributes 0 on
// a label match and 1 otherwise.
inline double distance(std::span<const double> a, std::span<const double> b, std::span<const FeatureKind> kinds) {
  double sum = 0.0;
  for (std::size_t j = 0; j < kinds.size(); ++j) {
    if (kinds[j] == FeatureKind::Categorical) {
      sum += a[j] == b[j] ? 0.0 : 1.0;
    } else {
      const double d = a[j] - b[j];
      sum += d * d;
    }
  }
  return std::sqrt(sum);
}

// All projects of `pool` ordered by (distance, index); ranks start at 1.
inline std::vector<Neighbor> rank_by_distance(const StandardizedDataset& pool, std::span<const double> target) {
  std::vector<Neighbor> all(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) all[i] = {i, distance(target, pool.row(i), pool.kinds()), 0};
  std::stable_sort(all.begin(), all.end(), [](const Neighbor& x, const Neighbor& y) { return x.distance < y.distance; });
  for (std::size_t r = 0; r < all.size(); ++r) all[r].rank = r + 1;
  return all;
}

inline std::vector<Neighbor> retrieve(const StandardizedDataset& train, const ProjectView& target, std::size_t k) {
  if (k < 1 || k > train.size())
    throw BoundsError("k = " + std::to_string(k) + " outside [1, " + std::to_string(train.size()) + "]");
  auto all = rank_by_distance(train, target.features);
  all.resize(k);
  return all;
}

inline double mean_aggregate(std::span<const double> efforts) {
  if (efforts.empty()) throw InvalidArgument("mean_aggregate of an empty sequence");
  return std::accumulate(efforts.begin(), efforts.end(), 0.0) / static_cast<double>(efforts.size());
}

// Inverse ranked weighted mean; efforts ordered nearest first.
inline double irwm_aggregate(std::span<const double> efforts_by_rank) {
  if (efforts_by_rank.empty()) throw InvalidArgument("irwm_aggregate of an empty sequence");
  const std::size_t k = efforts_by_rank.size();
  double num = 0.0;
  for (std::size_t i = 0; i < k; ++i) num += static_cast<double>(k - i) * efforts_by_rank[i];
  return num / (static_cast<double>(k) * static_cast<double>(k + 1) / 2.0);
}

// Weight of the rank-r analogy (1-based) among k: 2^(k-r) / (2^k - 1),
// evaluated as 2^-r / (1 - 2^-k) so large k cannot overflow.
inline double owm_weight(std::size_t rank, std::size_t k) {
  return std::ldexp(1.0, -static_cast<int>(rank)) / (1.0 - std::ldexp(1.0, -static_cast<int>(k)));
}

inline std::vector<double> owm_weights(std::size_t k) {
  std::vector<double> w(k);
  for (std::size_t r = 1; r <= k; ++r) w[r - 1] = owm_weight(r, k);
  return w;
}

// Ordered weighted mean; adapted efforts ordered nearest first.
inline double owm_aggregate(std::span<const double> adapted_by_rank) {
  if (adapted_by_rank.empty()) throw InvalidArgument("owm_aggregate of an empty sequence");
  const std::size_t k = adapted_by_rank.size();
  double sum = 0.0;
  for (std::size_t r = 1; r <= k; ++r) sum += owm_weight(r, k) * adapted_by_rank[r - 1];
  return sum;
}

// Adapted effort of one analogy: e + (1/m) * sum_j w_j * v_j * (target_j - analogy_j).
// Categorical features never contribute; the divisor is the total input count.
inline double adapt_effort(std::span<const double> target, std::span<const double> analogy, double analogy_effort,
                           std::span<const double> weights_row, const FeatureMask& mask,
                           std::span<const FeatureKind> kinds) {
  const std::size_t m = target.size();
  if (analogy.size() != m || weights_row.size() != m || mask.width() != m || kinds.size() != m)
    throw InvalidArgument("adapt_effort: feature vectors, weights, mask and kinds must share one length");
  double sum = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    if (!mask.test(j) || kinds[j] == FeatureKind::Categorical) continue;
    sum += weights_row[j] * (target[j] - analogy[j]);
  }
  return analogy_effort + sum / static_cast<double>(m);
}

inline double adapt_effort(std::span<const double> target, std::span<const double> analogy, double analogy_effort,
                           std::span<const double> weights_row, const FeatureMask& mask) {
  const std::vector<FeatureKind> numeric(target.size(), FeatureKind::Numeric);
  return adapt_effort(target, analogy, analogy_effort, weights_row, mask, numeric);
}

inline double predict_abe0(const StandardizedDataset& train, const ProjectView& target, std::size_t k) {
  const auto nbrs = retrieve(train, target, k);
  std::vector<double> efforts;
  efforts.reserve(k);
  for (const Neighbor& n : nbrs) efforts.push_back(train.effort(n.index));
  return mean_aggregate(efforts);
}

// Adapts and OWM-aggregates the first k entries of `ranked`, which index
// into `pool`. `weight_row(r)` yields the weights for the rank-(r+1) analogy.
// Shared by the direct and the precomputed-neighbour prediction paths.
template <class WeightRowFn>
double estimate_from_ranked(const StandardizedDataset& pool, std::span<const double> target,
                            std::span<const Neighbor> ranked, std::size_t k, const FeatureMask& mask,
                            WeightRowFn&& weight_row) {
  const std::size_t m = pool.feature_count();
  const auto kinds = pool.kinds();
  const double inv_m = 1.0 / static_cast<double>(m);
  const double norm = 1.0 / (1.0 - std::ldexp(1.0, -static_cast<int>(k)));
  double estimate = 0.0;
  for (std::size_t r = 0; r < k; ++r) {
    const auto analogy = pool.row(ranked[r].index);
    const std::span<const double> w = weight_row(r);
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (kinds[j] == FeatureKind::Categorical || !mask.test(j)) continue;
      sum += w[j] * (target[j] - analogy[j]);
    }
    const double adapted = pool.effort(ranked[r].index) + sum * inv_m;
    estimate += std::ldexp(1.0, -static_cast<int>(r + 1)) * norm * adapted;
  }
  return std::max(estimate, kEffortFloor);
}

inline void check_solution(const SolutionVector& sol, std::size_t n_train, std::size_t m) {
  if (sol.k < 1 || sol.k > n_train)
    throw BoundsError("solution k = " + std::to_string(sol.k) + " outside [1, " + std::to_string(n_train) + "]");
  if (sol.mask.width() != m) throw InvalidArgument("solution mask width does not match the feature count");
  if (sol.weights.cols() != m || sol.weights.rows() < sol.k)
    throw InvalidArgument("solution weight matrix must have m columns and at least k rows");
}

inline double predict_adapted(const StandardizedDataset& train, const ProjectView& target, const SolutionVector& sol) {
  check_solution(sol, train.size(), train.feature_count());
  const auto nbrs = retrieve(train, target, sol.k);
  return estimate_from_ranked(train, target.features, nbrs, sol.k, sol.mask,
                              [&](std::size_t r) { return sol.weights.row(r); });
}

// For every project, all other projects ranked by distance (ties by index).
// Entry i is exactly what retrieve() returns for project i against the
// leave-one-out training set, with indices mapped back to the full dataset.
class LoocvNeighbors {
 public:
  explicit LoocvNeighbors(const StandardizedDataset& ds) : n_(ds.size()), table_(n_ * (n_ - 1)) {
    for (std::size_t i = 0; i < n_; ++i) {
      auto dest = table_.begin() + static_cast<std::ptrdiff_t>(i * (n_ - 1));
      std::size_t slot = 0;
      for (std::size_t j = 0; j < n_; ++j) {
        if (j == i) continue;
        dest[static_cast<std::ptrdiff_t>(slot++)] = {j, distance(ds.row(i), ds.row(j), ds.kinds()), 0};
      }
      std::stable_sort(dest, dest + static_cast<std::ptrdiff_t>(n_ - 1),
                       [](const Neighbor& x, const Neighbor& y) { return x.distance < y.distance; });
      for (std::size_t r = 0; r + 1 < n_; ++r) dest[static_cast<std::ptrdiff_t>(r)].rank = r + 1;
    }
  }

  std::size_t size() const noexcept { return n_; }

  std::span<const Neighbor> of(std::size_t i) const {
    return std::span<const Neighbor>(table_).subspan(i * (n_ - 1), n_ - 1);
  }

 private:
  std::size_t n_;
  std::vector<Neighbor> table_;
};

}  // namespace abe

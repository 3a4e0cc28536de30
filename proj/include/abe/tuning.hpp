#pragma once

// Solution encoding, the local and global tuning objectives, Pareto-front
// selection, and the ABE0 best-k scan.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abe/core.hpp"
#include "abe/data.hpp"
#include "abe/error.hpp"
#include "abe/metrics.hpp"
#include "abe/mopso.hpp"
#include "abe/parallel.hpp"

namespace abe {

using mopso::ObjectiveVector;

enum class TuningMode { LocalOracle, LocalHonest, Global };

inline std::string_view to_string(TuningMode m) {
  switch (m) {
    case TuningMode::LocalOracle: return "LocalOracle";
    case TuningMode::LocalHonest: return "LocalHonest";
    case TuningMode::Global: return "Global";
  }
  return "?";
}

struct VariantConfig {
  bool optimize_k = true;
  bool optimize_features = true;
  bool optimize_weights = true;
  TuningMode mode = TuningMode::LocalOracle;
  std::size_t fixed_k = 1;  // used when optimize_k is off, clamped to the training size

  bool is_local() const noexcept { return mode != TuningMode::Global; }

  void validate() const {
    if (!optimize_k && !optimize_features && !optimize_weights)
      throw ConfigError("variant must optimize at least one decision variable");
    if (fixed_k < 1) throw ConfigError("fixed k must be at least 1");
  }

  static VariantConfig full(TuningMode mode) { return {true, true, true, mode, 1}; }
  static VariantConfig fixed_features(TuningMode mode) { return {true, false, true, mode, 1}; }
  static VariantConfig equal_weights(TuningMode mode) { return {true, true, false, mode, 1}; }

  bool operator==(const VariantConfig&) const = default;
};

inline FeatureMask decode_mask(std::uint64_t v, std::size_t m) { return FeatureMask::from_integer(v, m); }

// Clamps into [0, 1] and rescales to unit sum; an all-zero row becomes 1/m.
inline void normalize_weight_row(std::span<double> row) {
  double sum = 0.0;
  for (double& w : row) {
    w = std::clamp(w, 0.0, 1.0);
    sum += w;
  }
  if (sum > 0.0) {
    for (double& w : row) w /= sum;
  } else {
    const double u = 1.0 / static_cast<double>(row.size());
    for (double& w : row) w = u;
  }
}

// Maps a continuous optimizer position to a SolutionVector. Layout is
// [k][v][weights row-major], with fixed variables left out. k and v occupy
// [0.5, max + 0.5] so every integer gets an equal share of the range.
class PositionLayout {
 public:
  PositionLayout(std::size_t k_max, std::size_t weight_rows, std::size_t m, const VariantConfig& variant)
      : k_max_(k_max), rows_(weight_rows), m_(m), variant_(variant) {
    variant_.validate();
    if (k_max_ < 1) throw InvalidArgument("k_max must be at least 1");
    if (m_ < 1 || m_ > kMaxInputFeatures) throw InvalidArgument("feature count must be in [1, 63]");
    if (rows_ < k_max_) throw InvalidArgument("weight matrix needs at least k_max rows");
    std::size_t d = 0;
    if (variant_.optimize_k) k_dim_ = d++;
    if (variant_.optimize_features) v_dim_ = d++;
    w_offset_ = d;
    if (variant_.optimize_weights) d += rows_ * m_;
    dims_ = d;
  }

  std::size_t dims() const noexcept { return dims_; }
  std::size_t k_max() const noexcept { return k_max_; }
  std::size_t weight_rows() const noexcept { return rows_; }
  std::size_t feature_count() const noexcept { return m_; }
  const VariantConfig& variant() const noexcept { return variant_; }

  mopso::Bounds bounds() const {
    std::vector<double> lo(dims_, 0.0);
    std::vector<double> hi(dims_, 1.0);
    if (k_dim_) {
      lo[*k_dim_] = 0.5;
      hi[*k_dim_] = static_cast<double>(k_max_) + 0.5;
    }
    if (v_dim_) {
      lo[*v_dim_] = 0.5;
      hi[*v_dim_] = static_cast<double>(FeatureMask::max_value(m_)) + 0.5;
    }
    return mopso::Bounds(std::move(lo), std::move(hi));
  }

  std::size_t decode_k(std::span<const double> x) const {
    if (!k_dim_) return std::min(variant_.fixed_k, k_max_);
    return static_cast<std::size_t>(round_clamp(x[*k_dim_], 1.0, static_cast<double>(k_max_)));
  }

  FeatureMask decode_mask(std::span<const double> x) const {
    if (!v_dim_) return FeatureMask::all(m_);
    const double top = static_cast<double>(FeatureMask::max_value(m_));
    const double v = round_clamp(x[*v_dim_], 1.0, top);
    // 2^63 - 1 is not representable; the clamp above may land on 2^63.
    const std::uint64_t iv =
        v >= top ? FeatureMask::max_value(m_) : static_cast<std::uint64_t>(v);
    return FeatureMask::from_integer(std::max<std::uint64_t>(iv, 1), m_);
  }

  // Weights of rank-(r+1) analogy written into `out` (m entries).
  void decode_weight_row(std::span<const double> x, std::size_t r, std::span<double> out) const {
    if (!variant_.optimize_weights) {
      std::fill(out.begin(), out.end(), 1.0);
      return;
    }
    const auto src = x.subspan(w_offset_ + r * m_, m_);
    std::copy(src.begin(), src.end(), out.begin());
    normalize_weight_row(out);
  }

  SolutionVector decode(std::span<const double> x) const {
    check_size(x);
    SolutionVector sol;
    sol.k = decode_k(x);
    sol.mask = decode_mask(x);
    sol.weights = WeightMatrix(rows_, m_, 1.0);
    for (std::size_t r = 0; r < rows_; ++r) decode_weight_row(x, r, sol.weights.row(r));
    return sol;
  }

  std::vector<double> encode(const SolutionVector& sol) const {
    if (sol.mask.width() != m_ || sol.weights.rows() != rows_ || sol.weights.cols() != m_)
      throw InvalidArgument("solution shape does not match the position layout");
    std::vector<double> x(dims_, 0.0);
    if (k_dim_) x[*k_dim_] = static_cast<double>(sol.k);
    if (v_dim_) x[*v_dim_] = static_cast<double>(sol.mask.value());
    if (variant_.optimize_weights) std::copy(sol.weights.data().begin(), sol.weights.data().end(), x.begin() + w_offset_);
    return x;
  }

 private:
  static double round_clamp(double x, double lo, double hi) { return std::clamp(std::floor(x + 0.5), lo, hi); }

  void check_size(std::span<const double> x) const {
    if (x.size() != dims_)
      throw InvalidArgument("position has " + std::to_string(x.size()) + " dimensions, layout expects " +
                            std::to_string(dims_));
  }

  std::size_t k_max_;
  std::size_t rows_;
  std::size_t m_;
  VariantConfig variant_;
  std::optional<std::size_t> k_dim_;
  std::optional<std::size_t> v_dim_;
  std::size_t w_offset_ = 0;
  std::size_t dims_ = 0;
};

inline ObjectiveVector single_objectives(double actual, double predicted) {
  const PredictionRecord r{actual, predicted};
  return {ae(r), bre(r), ibre(r)};
}

// (AE, BRE, IBRE) of one prediction. Uses the target's actual effort.
inline ObjectiveVector lt_objectives(const StandardizedDataset& train, const ProjectView& target, double target_actual,
                                     const SolutionVector& sol) {
  return single_objectives(target_actual, predict_adapted(train, target, sol));
}

inline ObjectiveVector aggregate_objectives(std::span<const PredictionRecord> records,
                                            const RandomGuessBaseline& baseline) {
  if (records.empty()) throw InvalidArgument("aggregate objectives of an empty record sequence");
  double mae = 0.0, mbre = 0.0, mibre = 0.0;
  for (const auto& r : records) {
    mae += ae(r);
    mbre += bre(r);
    mibre += ibre(r);
  }
  const double n = static_cast<double>(records.size());
  return {-sa_or_degenerate(mae / n, baseline), mbre / n, mibre / n};
}

namespace detail {

// Internal leave-one-out evaluation of one solution over a fixed dataset,
// with neighbour tables and the baseline computed once.
class LoocvScorer {
 public:
  explicit LoocvScorer(const StandardizedDataset& ds)
      : ds_(&ds), neighbors_(ds), baseline_(random_guess_baseline(ds.efforts())) {}

  const StandardizedDataset& dataset() const noexcept { return *ds_; }
  const LoocvNeighbors& neighbors() const noexcept { return neighbors_; }
  const RandomGuessBaseline& baseline() const noexcept { return baseline_; }

  template <class WeightRowFn>
  std::vector<PredictionRecord> predict_all(std::size_t k, const FeatureMask& mask, WeightRowFn&& weight_row) const {
    std::vector<PredictionRecord> out(ds_->size());
    for (std::size_t i = 0; i < ds_->size(); ++i)
      out[i] = {ds_->effort(i), estimate_from_ranked(*ds_, ds_->row(i), neighbors_.of(i), k, mask, weight_row)};
    return out;
  }

  std::vector<PredictionRecord> predict_all(const SolutionVector& sol) const {
    check_solution(sol, ds_->size() - 1, ds_->feature_count());
    return predict_all(sol.k, sol.mask, [&](std::size_t r) { return sol.weights.row(r); });
  }

  ObjectiveVector objectives(const SolutionVector& sol) const { return aggregate_objectives(predict_all(sol), baseline_); }

 private:
  const StandardizedDataset* ds_;
  LoocvNeighbors neighbors_;
  RandomGuessBaseline baseline_;
};

// Decodes only the weight rows a prediction will read.
class LazyWeights {
 public:
  LazyWeights(const PositionLayout& layout, std::span<const double> x, std::size_t k)
      : layout_(&layout), x_(x), buf_(k * layout.feature_count()) {
    const std::size_t m = layout.feature_count();
    for (std::size_t r = 0; r < k; ++r) layout.decode_weight_row(x, r, std::span<double>(buf_).subspan(r * m, m));
  }
  std::span<const double> operator()(std::size_t r) const {
    const std::size_t m = layout_->feature_count();
    return std::span<const double>(buf_).subspan(r * m, m);
  }

 private:
  const PositionLayout* layout_;
  std::span<const double> x_;
  std::vector<double> buf_;
};

}  // namespace detail

// (-SA, MBRE, MIBRE) of leave-one-out predictions over `ds`, all made with `sol`.
inline ObjectiveVector gt_objectives(const StandardizedDataset& ds, const SolutionVector& sol) {
  if (ds.size() < 2) throw InsufficientDataError("global objectives need at least two projects");
  return detail::LoocvScorer(ds).objectives(sol);
}

// Rank-aggregated choice: per objective rank ascending (ties share the
// average rank), take the mean rank, keep the smallest. Ties go to the
// smaller first objective, then to the earlier entry.
inline std::size_t select_from_front(std::span<const ObjectiveVector> front) {
  if (front.empty()) throw InvalidArgument("select_from_front: empty front");
  const std::size_t n = front.size();
  const std::size_t objectives = front[0].size();
  std::vector<double> mean_rank(n, 0.0);
  std::vector<std::size_t> order(n);
  for (std::size_t o = 0; o < objectives; ++o) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return front[a][o] < front[b][o]; });
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j + 1 < n && front[order[j + 1]][o] == front[order[i]][o]) ++j;
      const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
      for (std::size_t t = i; t <= j; ++t) mean_rank[order[t]] += rank;
      i = j + 1;
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (mean_rank[i] < mean_rank[best] || (mean_rank[i] == mean_rank[best] && front[i][0] < front[best][0])) best = i;
  }
  return best;
}

inline std::size_t select_from_front(const mopso::Archive& archive) {
  std::vector<ObjectiveVector> f;
  f.reserve(archive.size());
  for (const auto& e : archive.entries()) f.push_back(e.objectives);
  return select_from_front(f);
}

struct ProjectTuning {
  SolutionVector solution;
  ObjectiveVector objectives;  // of the selected front member
  std::vector<ObjectiveVector> front;  // every archive member, insertion order
};

struct TuningResult {
  TuningMode mode = TuningMode::LocalOracle;
  VariantConfig variant;
  std::vector<PredictionRecord> predictions;  // dataset order
  // One entry per project for local tuning, a single shared entry for global.
  std::vector<ProjectTuning> tuned;

  bool shared() const noexcept { return mode == TuningMode::Global; }
  const ProjectTuning& for_project(std::size_t i) const { return shared() ? tuned.at(0) : tuned.at(i); }

  std::vector<std::size_t> k_values() const {
    std::vector<std::size_t> ks(predictions.size());
    for (std::size_t i = 0; i < ks.size(); ++i) ks[i] = for_project(i).solution.k;
    return ks;
  }
};

namespace detail {

inline void check_tunable(const StandardizedDataset& ds) {
  if (ds.size() < kMinProjects)
    throw InsufficientDataError("tuning needs at least " + std::to_string(kMinProjects) + " projects, got " +
                                std::to_string(ds.size()));
}

template <class Evaluate>
ProjectTuning optimize(const PositionLayout& layout, Evaluate&& evaluate, mopso::MopsoConfig cfg) {
  const mopso::Archive archive = mopso::run(layout.bounds(), evaluate, cfg);
  std::vector<ObjectiveVector> front;
  front.reserve(archive.size());
  for (const auto& e : archive.entries()) front.push_back(e.objectives);
  const std::size_t chosen = select_from_front(front);
  return {layout.decode(archive[chosen].position), archive[chosen].objectives, std::move(front)};
}

// Fold i of local tuning against the label of project i.
inline ProjectTuning tune_fold_oracle(const StandardizedDataset& ds, const LoocvNeighbors& nb, std::size_t i,
                                      const VariantConfig& variant, const mopso::MopsoConfig& cfg) {
  const std::size_t n_train = ds.size() - 1;
  const PositionLayout layout(n_train, n_train, ds.feature_count(), variant);
  const auto target = ds.row(i);
  const double actual = ds.effort(i);
  const auto ranked = nb.of(i);
  auto evaluate = [&](std::span<const double> x) {
    const std::size_t k = layout.decode_k(x);
    const LazyWeights w(layout, x, k);
    return single_objectives(actual, estimate_from_ranked(ds, target, ranked, k, layout.decode_mask(x), w));
  };
  return optimize(layout, evaluate, cfg);
}

// Fold i of local tuning using only the training projects: the optimizer
// scores leave-one-out aggregates inside the fold.
inline ProjectTuning tune_fold_honest(const StandardizedDataset& train, const VariantConfig& variant,
                                      const mopso::MopsoConfig& cfg) {
  const std::size_t n_train = train.size();
  const PositionLayout layout(n_train - 1, n_train, train.feature_count(), variant);
  const LoocvScorer scorer(train);
  auto evaluate = [&](std::span<const double> x) {
    const std::size_t k = layout.decode_k(x);
    const LazyWeights w(layout, x, k);
    return aggregate_objectives(scorer.predict_all(k, layout.decode_mask(x), w), scorer.baseline());
  };
  return optimize(layout, evaluate, cfg);
}

}  // namespace detail

// Local tuning: one optimizer run per held-out project. Folds run on up to
// cfg.threads workers; each fold's optimizer is single-threaded and seeded
// with cfg.seed XOR project index.
inline TuningResult run_lt(const StandardizedDataset& ds, const VariantConfig& variant, const mopso::MopsoConfig& cfg) {
  variant.validate();
  cfg.validate();
  if (!variant.is_local()) throw ConfigError("run_lt needs a local tuning mode");
  detail::check_tunable(ds);
  const std::size_t n = ds.size();

  TuningResult result;
  result.mode = variant.mode;
  result.variant = variant;
  result.predictions.resize(n);
  result.tuned.resize(n);

  const LoocvNeighbors nb(ds);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    mopso::MopsoConfig fold_cfg = cfg;
    fold_cfg.seed = cfg.seed ^ static_cast<std::uint64_t>(i);
    fold_cfg.threads = 1;
    try {
      if (variant.mode == TuningMode::LocalOracle) {
        result.tuned[i] = detail::tune_fold_oracle(ds, nb, i, variant, fold_cfg);
      } else {
        const StandardizedDataset train = ds.without(i);
        result.tuned[i] = detail::tune_fold_honest(train, variant, fold_cfg);
      }
      const SolutionVector& sol = result.tuned[i].solution;
      const double pred = estimate_from_ranked(ds, ds.row(i), nb.of(i), sol.k, sol.mask,
                                               [&](std::size_t r) { return sol.weights.row(r); });
      result.predictions[i] = {ds.effort(i), pred};
    } catch (const ValidationError&) {
      throw;
    } catch (const Error& e) {
      throw EvaluationError("fold " + std::to_string(i) + ": " + e.what());
    }
  });
  return result;
}

// Global tuning: one optimizer run over the whole dataset scored by internal
// leave-one-out, then the shared solution predicts every project with that
// project held out.
inline TuningResult run_gt(const StandardizedDataset& ds, const VariantConfig& variant, const mopso::MopsoConfig& cfg) {
  variant.validate();
  cfg.validate();
  if (variant.mode != TuningMode::Global) throw ConfigError("run_gt needs the global tuning mode");
  detail::check_tunable(ds);
  const std::size_t n_train = ds.size() - 1;

  const detail::LoocvScorer scorer(ds);
  const PositionLayout layout(n_train, n_train, ds.feature_count(), variant);
  auto evaluate = [&](std::span<const double> x) {
    const std::size_t k = layout.decode_k(x);
    const detail::LazyWeights w(layout, x, k);
    return aggregate_objectives(scorer.predict_all(k, layout.decode_mask(x), w), scorer.baseline());
  };

  TuningResult result;
  result.mode = variant.mode;
  result.variant = variant;
  result.tuned.push_back(detail::optimize(layout, evaluate, cfg));
  result.predictions = scorer.predict_all(result.tuned[0].solution);
  return result;
}

inline TuningResult run_tuning(const StandardizedDataset& ds, const VariantConfig& variant,
                               const mopso::MopsoConfig& cfg) {
  return variant.is_local() ? run_lt(ds, variant, cfg) : run_gt(ds, variant, cfg);
}

struct BestK {
  std::size_t k = 1;
  std::vector<PredictionRecord> predictions;
  std::vector<double> mae_by_k;  // entry k-1
};

// ABE0 with the single k in 1..n-1 that minimizes leave-one-out MAE; the
// smallest k wins ties.
inline BestK best_k_abe0(const StandardizedDataset& ds) {
  detail::check_tunable(ds);
  const std::size_t n = ds.size();
  const LoocvNeighbors nb(ds);
  // prefix[i * (n-1) + k-1] = mean effort of i's k nearest.
  std::vector<double> means(n * (n - 1));
  for (std::size_t i = 0; i < n; ++i) {
    const auto ranked = nb.of(i);
    double sum = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      sum += ds.effort(ranked[k - 1].index);
      means[i * (n - 1) + k - 1] = sum / static_cast<double>(k);
    }
  }
  BestK out;
  out.mae_by_k.resize(n - 1);
  for (std::size_t k = 1; k < n; ++k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += std::abs(ds.effort(i) - means[i * (n - 1) + k - 1]);
    out.mae_by_k[k - 1] = total / static_cast<double>(n);
  }
  out.k = static_cast<std::size_t>(std::min_element(out.mae_by_k.begin(), out.mae_by_k.end()) - out.mae_by_k.begin()) + 1;
  out.predictions.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.predictions[i] = {ds.effort(i), means[i * (n - 1) + out.k - 1]};
  return out;
}

}  // namespace abe

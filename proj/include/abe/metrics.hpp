#pragma once

// Accuracy measures: AE, BRE, IBRE and their means, SA against the
// random-guess baseline, effect size and LSD.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "abe/core.hpp"
#include "abe/error.hpp"
#include "abe/rng.hpp"

namespace abe {

struct PredictionRecord {
  double actual = 0.0;
  double predicted = 0.0;

  bool operator==(const PredictionRecord&) const = default;
};

inline double clamp_prediction(double predicted) { return std::max(predicted, kEffortFloor); }

inline double ae(const PredictionRecord& r) { return std::abs(r.actual - r.predicted); }

inline double bre(const PredictionRecord& r) {
  const double p = clamp_prediction(r.predicted);
  return std::abs(r.actual - p) / std::min(r.actual, p);
}

inline double ibre(const PredictionRecord& r) {
  const double p = clamp_prediction(r.predicted);
  return std::abs(r.actual - p) / std::max(r.actual, p);
}

struct MetricSuite {
  double mae = 0.0;
  double sa = std::numeric_limits<double>::quiet_NaN();
  double mbre = 0.0;
  double mibre = 0.0;
  double lsd = std::numeric_limits<double>::quiet_NaN();
  // |MAE - baseline| / baseline SD; absent when the baseline has no spread.
  std::optional<double> effect_size;
  std::size_t n = 0;
};

struct BaselineMode {
  enum class Kind { Exact, Sampled };
  Kind kind = Kind::Exact;
  std::size_t runs = 0;
  std::uint64_t seed = 0;

  static BaselineMode exact() { return {}; }
  static BaselineMode sampled(std::size_t runs, std::uint64_t seed) { return {Kind::Sampled, runs, seed}; }
  bool operator==(const BaselineMode&) const = default;
};

struct RandomGuessBaseline {
  double mae_p0 = 0.0;
  double sp0 = 0.0;  // sample SD of the individual guess errors
  BaselineMode mode;
};

// Log residual spread: sqrt(sum (lambda_i + s^2/2)^2 / (n - 1)) with
// lambda_i = ln(actual) - ln(predicted) and s^2 their sample variance.
inline double lsd(std::span<const PredictionRecord> records) {
  const std::size_t n = records.size();
  if (n < 2) throw InvalidArgument("lsd needs at least two records");
  std::vector<double> lambda(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(records[i].actual > 0.0)) throw InvalidArgument("lsd: actual effort must be positive");
    lambda[i] = std::log(records[i].actual) - std::log(clamp_prediction(records[i].predicted));
    mean += lambda[i];
  }
  mean /= static_cast<double>(n);
  double s2 = 0.0;
  for (double l : lambda) s2 += (l - mean) * (l - mean);
  s2 /= static_cast<double>(n - 1);
  double sum = 0.0;
  for (double l : lambda) sum += (l + s2 / 2.0) * (l + s2 / 2.0);
  return std::sqrt(sum / static_cast<double>(n - 1));
}

// MAE, MBRE, MIBRE and (for n >= 2) LSD. SA and effect size need a baseline,
// see evaluate().
inline MetricSuite aggregate(std::span<const PredictionRecord> records) {
  if (records.empty()) throw InvalidArgument("aggregate of an empty record sequence");
  MetricSuite s;
  s.n = records.size();
  for (const auto& r : records) {
    s.mae += ae(r);
    s.mbre += bre(r);
    s.mibre += ibre(r);
  }
  const double n = static_cast<double>(records.size());
  s.mae /= n;
  s.mbre /= n;
  s.mibre /= n;
  if (records.size() >= 2) s.lsd = lsd(records);
  return s;
}

inline double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

// Guessing project i's effort as e_r for a uniformly drawn r != i.
inline RandomGuessBaseline random_guess_baseline(std::span<const double> efforts,
                                                 BaselineMode mode = BaselineMode::exact()) {
  const std::size_t n = efforts.size();
  if (n < 2) throw InvalidArgument("random-guess baseline needs at least two efforts");
  RandomGuessBaseline b;
  b.mode = mode;

  if (mode.kind == BaselineMode::Kind::Exact) {
    // Mean and SD over all n(n-1) ordered pairs; every i carries equal weight
    // 1/n and every r != i weight 1/(n-1), so the pair mean is the MAE.
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t r = 0; r < n; ++r)
        if (r != i) sum += std::abs(efforts[i] - efforts[r]);
    const double pairs = static_cast<double>(n) * static_cast<double>(n - 1);
    b.mae_p0 = sum / pairs;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t r = 0; r < n; ++r)
        if (r != i) {
          const double d = std::abs(efforts[i] - efforts[r]) - b.mae_p0;
          ss += d * d;
        }
    b.sp0 = pairs > 1.0 ? std::sqrt(ss / (pairs - 1.0)) : 0.0;
    return b;
  }

  if (mode.runs < 1) throw InvalidArgument("sampled random-guess baseline needs at least one run");
  Rng rng(mode.seed);
  // Welford over individual guess errors; run MAEs averaged separately.
  double mae_sum = 0.0;
  double mean = 0.0;
  double m2 = 0.0;
  std::uint64_t count = 0;
  for (std::size_t run = 0; run < mode.runs; ++run) {
    double run_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = static_cast<std::size_t>(rng.below(n - 1));
      if (r >= i) ++r;
      const double err = std::abs(efforts[i] - efforts[r]);
      run_sum += err;
      ++count;
      const double delta = err - mean;
      mean += delta / static_cast<double>(count);
      m2 += delta * (err - mean);
    }
    mae_sum += run_sum / static_cast<double>(n);
  }
  b.mae_p0 = mae_sum / static_cast<double>(mode.runs);
  b.sp0 = count > 1 ? std::sqrt(m2 / static_cast<double>(count - 1)) : 0.0;
  return b;
}

inline double sa(double mae, const RandomGuessBaseline& baseline) {
  if (!(baseline.mae_p0 > 0.0)) throw UndefinedBaselineError("SA undefined: random-guess MAE is zero");
  return 1.0 - mae / baseline.mae_p0;
}

// SA that stays finite when every effort is identical (zero-spread
// baseline): a perfect predictor scores 1, anything else is measured
// against kEffortFloor.
inline double sa_or_degenerate(double mae, const RandomGuessBaseline& baseline) {
  if (baseline.mae_p0 > 0.0) return sa(mae, baseline);
  return 1.0 - mae / kEffortFloor;
}

inline double signed_effect_size(double mae, double baseline_mae, double baseline_sd) {
  if (!(baseline_sd > 0.0)) throw InvalidArgument("effect size undefined: baseline SD is zero");
  return (mae - baseline_mae) / baseline_sd;
}

inline double effect_size(double mae, double baseline_mae, double baseline_sd) {
  return std::abs(signed_effect_size(mae, baseline_mae, baseline_sd));
}

// Full suite against the random-guess baseline.
inline MetricSuite evaluate(std::span<const PredictionRecord> records, const RandomGuessBaseline& baseline) {
  MetricSuite s = aggregate(records);
  s.sa = sa_or_degenerate(s.mae, baseline);
  if (baseline.sp0 > 0.0) s.effect_size = effect_size(s.mae, baseline.mae_p0, baseline.sp0);
  return s;
}

inline std::vector<double> absolute_errors(std::span<const PredictionRecord> records) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(ae(r));
  return out;
}

}  // namespace abe

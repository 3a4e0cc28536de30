#pragma once

// Wilcoxon rank-sum test, win-tie-loss tournaments and rank summaries.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abe/error.hpp"
#include "abe/metrics.hpp"

namespace abe {

inline constexpr double kSignificanceLevel = 0.05;
inline constexpr std::size_t kExactWilcoxonLimit = 16;  // n_a + n_b at or below: exact

namespace detail {

// Midranks of the pooled sample, doubled so they stay integral.
inline std::vector<std::int64_t> doubled_midranks(std::span<const double> pooled) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  std::vector<std::int64_t> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const auto twice = static_cast<std::int64_t>(i + 1 + j + 1);
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = twice;
    i = j + 1;
  }
  return ranks;
}

inline double wilcoxon_exact(const std::vector<std::int64_t>& ranks2, std::size_t na) {
  const std::size_t n = ranks2.size();
  const auto center2 = static_cast<std::int64_t>(na * (n + 1));  // 2 * E[W]
  std::int64_t observed2 = 0;
  for (std::size_t i = 0; i < na; ++i) observed2 += ranks2[i];
  const std::int64_t observed_dev = std::llabs(observed2 - center2);

  // Every na-subset of positions, in Gosper order.
  std::uint64_t extreme = 0;
  std::uint64_t total = 0;
  const std::uint64_t limit = std::uint64_t{1} << n;
  for (std::uint64_t s = (std::uint64_t{1} << na) - 1; s < limit;) {
    std::int64_t w2 = 0;
    for (std::uint64_t bits = s; bits != 0; bits &= bits - 1) w2 += ranks2[static_cast<std::size_t>(std::countr_zero(bits))];
    if (std::llabs(w2 - center2) >= observed_dev) ++extreme;
    ++total;
    const std::uint64_t c = s & (~s + 1);
    const std::uint64_t r = s + c;
    if (r >= limit || r == 0) break;
    s = (((r ^ s) >> 2) / c) | r;
  }
  return std::min(1.0, static_cast<double>(extreme) / static_cast<double>(total));
}

inline double wilcoxon_normal(const std::vector<std::int64_t>& ranks2, std::size_t na) {
  const std::size_t n = ranks2.size();
  const double nb = static_cast<double>(n - na);
  const double N = static_cast<double>(n);
  double w = 0.0;
  for (std::size_t i = 0; i < na; ++i) w += static_cast<double>(ranks2[i]) / 2.0;
  const double mean = static_cast<double>(na) * (N + 1.0) / 2.0;

  std::map<std::int64_t, double> ties;
  for (auto r : ranks2) ties[r] += 1.0;
  double tie_sum = 0.0;
  for (const auto& [r, t] : ties) tie_sum += t * t * t - t;
  const double var = static_cast<double>(na) * nb / 12.0 * ((N + 1.0) - tie_sum / (N * (N - 1.0)));
  if (!(var > 0.0)) return 1.0;
  const double z = std::max(std::abs(w - mean) - 0.5, 0.0) / std::sqrt(var);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

}  // namespace detail

// Two-sided p-value of the rank-sum test; midranks for ties. Exact
// enumeration for small pooled sizes, otherwise the normal approximation
// with tie and continuity corrections.
inline double wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("wilcoxon_rank_sum: both samples must be nonempty");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  for (double x : pooled)
    if (std::isnan(x)) throw InvalidArgument("wilcoxon_rank_sum: NaN in sample");
  const auto ranks2 = detail::doubled_midranks(pooled);
  if (pooled.size() <= kExactWilcoxonLimit) return detail::wilcoxon_exact(ranks2, a.size());
  return detail::wilcoxon_normal(ranks2, a.size());
}

// Normal approximation regardless of sample size.
inline double wilcoxon_rank_sum_normal(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("wilcoxon_rank_sum: both samples must be nonempty");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  return detail::wilcoxon_normal(detail::doubled_midranks(pooled), a.size());
}

enum class Measure { MAE, SA, MBRE, MIBRE, LSD };

inline constexpr Measure kAllMeasures[] = {Measure::MAE, Measure::SA, Measure::MBRE, Measure::MIBRE, Measure::LSD};

inline std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::MAE: return "MAE";
    case Measure::SA: return "SA";
    case Measure::MBRE: return "MBRE";
    case Measure::MIBRE: return "MIBRE";
    case Measure::LSD: return "LSD";
  }
  return "?";
}

inline Measure measure_from_string(std::string_view s) {
  for (Measure m : kAllMeasures)
    if (to_string(m) == s) return m;
  throw ConfigError("unknown measure '" + std::string(s) + "'");
}

inline bool higher_is_better(Measure m) noexcept { return m == Measure::SA; }

// Strictly better on this measure.
inline bool better(Measure m, double a, double b) noexcept { return higher_is_better(m) ? a > b : a < b; }

inline double measure_value(const MetricSuite& s, Measure m) {
  switch (m) {
    case Measure::MAE: return s.mae;
    case Measure::SA: return s.sa;
    case Measure::MBRE: return s.mbre;
    case Measure::MIBRE: return s.mibre;
    case Measure::LSD: return s.lsd;
  }
  return s.mae;
}

enum class Outcome { Win, Tie, Loss };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Win: return "win";
    case Outcome::Tie: return "tie";
    case Outcome::Loss: return "loss";
  }
  return "?";
}

struct Tally {
  std::size_t win = 0;
  std::size_t tie = 0;
  std::size_t loss = 0;

  Tally& operator+=(const Tally& o) {
    win += o.win;
    tie += o.tie;
    loss += o.loss;
    return *this;
  }
  bool operator==(const Tally&) const = default;
};

// One unordered method pair; outcomes are from method_a's side.
struct ComparisonResult {
  std::string method_a;
  std::string method_b;
  double p_value = 1.0;
  std::map<Measure, Outcome> outcomes;

  bool operator==(const ComparisonResult&) const = default;
};

using MeasureTable = std::map<std::string, std::map<Measure, double>>;  // method -> measure -> value

namespace detail {

inline void check_aligned(const std::map<std::string, std::vector<double>>& errors) {
  if (errors.size() < 2) throw InvalidArgument("win_tie_loss needs at least two methods");
  const std::size_t n = errors.begin()->second.size();
  for (const auto& [name, e] : errors)
    if (e.size() != n)
      throw InvalidArgument("absolute errors of '" + name + "' have length " + std::to_string(e.size()) +
                            ", expected " + std::to_string(n));
}

inline double lookup(const MeasureTable& values, const std::string& method, Measure m) {
  const auto it = values.find(method);
  if (it == values.end()) throw InvalidArgument("no measures for method '" + method + "'");
  const auto jt = it->second.find(m);
  if (jt == it->second.end())
    throw InvalidArgument("measure " + std::string(to_string(m)) + " missing for method '" + method + "'");
  return jt->second;
}

}  // namespace detail

// Every unordered pair of methods (in name order) tested once on absolute
// errors. p >= 0.05 ties the pair; otherwise the side better on the measure
// wins, and when it is not strictly better the other side wins.
inline std::vector<ComparisonResult> compare_methods(const std::map<std::string, std::vector<double>>& errors,
                                                     const MeasureTable& values, std::span<const Measure> measures) {
  detail::check_aligned(errors);
  std::vector<ComparisonResult> out;
  for (auto i = errors.begin(); i != errors.end(); ++i) {
    for (auto j = std::next(i); j != errors.end(); ++j) {
      ComparisonResult c{i->first, j->first, wilcoxon_rank_sum(i->second, j->second), {}};
      for (Measure m : measures) {
        if (c.p_value >= kSignificanceLevel)
          c.outcomes[m] = Outcome::Tie;
        else
          c.outcomes[m] = better(m, detail::lookup(values, i->first, m), detail::lookup(values, j->first, m))
                              ? Outcome::Win
                              : Outcome::Loss;
      }
      out.push_back(std::move(c));
    }
  }
  return out;
}

// Per-method tallies summed over the given comparisons and measures.
inline std::map<std::string, Tally> tally(std::span<const ComparisonResult> comparisons) {
  std::map<std::string, Tally> t;
  for (const auto& c : comparisons) {
    Tally& a = t[c.method_a];
    Tally& b = t[c.method_b];
    for (const auto& [m, o] : c.outcomes) {
      if (o == Outcome::Tie) {
        ++a.tie;
        ++b.tie;
      } else if (o == Outcome::Win) {
        ++a.win;
        ++b.loss;
      } else {
        ++a.loss;
        ++b.win;
      }
    }
  }
  return t;
}

inline std::map<std::string, Tally> win_tie_loss(const std::map<std::string, std::vector<double>>& errors,
                                                 const std::map<std::string, double>& measure, Measure which) {
  MeasureTable values;
  for (const auto& [name, v] : measure) values[name][which] = v;
  const Measure ms[] = {which};
  const auto comparisons = compare_methods(errors, values, ms);
  return tally(comparisons);
}

struct RankSummary {
  std::string method;
  Measure measure = Measure::MAE;
  double mean_rank = 0.0;
  double rank_sd = 0.0;  // sample SD across datasets

  bool operator==(const RankSummary&) const = default;
};

// table: dataset -> method -> value. Rank 1 is best; ties share the average
// rank. Every dataset must carry every method.
inline std::vector<RankSummary> rank_methods(const std::map<std::string, std::map<std::string, double>>& table,
                                             Measure measure) {
  if (table.empty()) throw InvalidArgument("rank_methods: empty table");
  std::vector<std::string> methods;
  for (const auto& [name, v] : table.begin()->second) methods.push_back(name);
  if (methods.empty()) throw InvalidArgument("rank_methods: no methods");

  std::map<std::string, std::vector<double>> ranks;
  for (const auto& [dataset, row] : table) {
    std::vector<double> vals;
    for (const auto& m : methods) {
      const auto it = row.find(m);
      if (it == row.end()) throw InvalidArgument("rank_methods: missing cell (" + dataset + ", " + m + ")");
      vals.push_back(it->second);
    }
    if (row.size() != methods.size()) throw InvalidArgument("rank_methods: dataset '" + dataset + "' has extra methods");
    for (std::size_t i = 0; i < vals.size(); ++i) {
      double strictly_better = 0.0;
      double equal = 0.0;
      for (std::size_t j = 0; j < vals.size(); ++j) {
        if (j == i) continue;
        if (vals[j] == vals[i])
          equal += 1.0;
        else if (better(measure, vals[j], vals[i]))
          strictly_better += 1.0;
      }
      ranks[methods[i]].push_back(1.0 + strictly_better + equal / 2.0);
    }
  }

  std::vector<RankSummary> out;
  for (const auto& m : methods) {
    const auto& r = ranks[m];
    const double mean = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
    out.push_back({m, measure, mean, sample_sd(r)});
  }
  return out;
}

}  // namespace abe

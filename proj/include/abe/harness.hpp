#pragma once

// Experiment driver: method dispatch under leave-one-out, metric suites,
// pairwise statistics and rank summaries.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "abe/config.hpp"
#include "abe/core.hpp"
#include "abe/data.hpp"
#include "abe/error.hpp"
#include "abe/metrics.hpp"
#include "abe/stats.hpp"
#include "abe/tuning.hpp"

namespace abe {

struct SolutionRecord {
  std::size_t k = 1;
  std::string mask;                         // bit string, leftmost = first feature
  std::vector<std::vector<double>> weights;  // rows actually used (first k)

  bool operator==(const SolutionRecord&) const = default;
};

struct MethodRun {
  std::string dataset;
  std::string method;
  std::string mode;  // LocalOracle, LocalHonest, Global, or "none" for ABE0
  std::vector<PredictionRecord> predictions;
  MetricSuite metrics;
  // Starred and plus variants: |MAE - MAE_ref| / SD(reference absolute errors).
  std::optional<std::string> effect_reference;
  std::optional<double> effect_vs_reference;
  std::optional<std::size_t> best_k;      // ABE0
  std::vector<SolutionRecord> solutions;  // one per project (local) or one shared (global)

  std::vector<std::size_t> k_values() const {
    std::vector<std::size_t> ks;
    if (solutions.empty()) return ks;
    for (std::size_t i = 0; i < predictions.size(); ++i) ks.push_back(solutions[solutions.size() == 1 ? 0 : i].k);
    return ks;
  }
};

struct DatasetSummary {
  std::string name;
  std::size_t rows_raw = 0;
  std::size_t rows_used = 0;
  std::size_t features = 0;
  double baseline_mae = 0.0;
  double baseline_sd = 0.0;
};

struct EvaluationReport {
  std::string engine_version{kEngineVersion};
  json config;  // echo, see config_echo()
  BaselineMode baseline = BaselineMode::exact();
  std::vector<std::string> notes;
  std::vector<DatasetSummary> datasets;
  std::vector<MethodRun> runs;  // dataset-major, methods in config order
  std::map<std::string, std::vector<ComparisonResult>> comparisons;  // by dataset
  std::map<std::string, std::map<std::string, Tally>> win_tie_loss;  // dataset -> method, summed over measures
  std::map<std::string, Tally> win_tie_loss_total;
  std::vector<RankSummary> ranks;

  const MethodRun* find(const std::string& dataset, const std::string& method) const {
    for (const auto& r : runs)
      if (r.dataset == dataset && r.method == method) return &r;
    return nullptr;
  }
};

inline SolutionRecord record_solution(const SolutionVector& sol) {
  SolutionRecord r{sol.k, sol.mask.to_string(), {}};
  for (std::size_t i = 0; i < sol.k && i < sol.weights.rows(); ++i) {
    const auto row = sol.weights.row(i);
    r.weights.emplace_back(row.begin(), row.end());
  }
  return r;
}

inline VariantConfig variant_for(const std::string& method, bool honest) {
  const bool global = method.starts_with("GT");
  const TuningMode mode = global ? TuningMode::Global : honest ? TuningMode::LocalHonest : TuningMode::LocalOracle;
  if (method.ends_with('*')) return VariantConfig::fixed_features(mode);
  if (method.ends_with('+')) return VariantConfig::equal_weights(mode);
  return VariantConfig::full(mode);
}

// Seed of one (dataset, method) cell; independent of which other methods or
// datasets are configured alongside.
inline std::uint64_t cell_seed(std::uint64_t seed, std::size_t dataset_index, const std::string& method) {
  return derive_seed(derive_seed(seed, dataset_index), method_index(method));
}

// Leave-one-out predictions of one method, in dataset order.
inline MethodRun run_loocv(const StandardizedDataset& ds, const std::string& method, const mopso::MopsoConfig& mcfg,
                           bool honest = false) {
  const std::string canonical = canonical_method(method);
  MethodRun run;
  run.dataset = ds.name();
  run.method = canonical;
  if (canonical == "ABE0") {
    BestK best = best_k_abe0(ds);
    run.mode = "none";
    run.best_k = best.k;
    run.predictions = std::move(best.predictions);
    return run;
  }
  const VariantConfig variant = variant_for(canonical, honest);
  TuningResult result = run_tuning(ds, variant, mcfg);
  run.mode = std::string(to_string(result.mode));
  run.predictions = std::move(result.predictions);
  for (const auto& t : result.tuned) run.solutions.push_back(record_solution(t.solution));
  return run;
}

inline std::optional<std::string> effect_reference_of(const std::string& method) {
  if (method.ends_with('*') || method.ends_with('+')) return method.substr(0, 2);
  return std::nullopt;
}

// Fills metrics and cross-method statistics from the stored predictions.
// Runs must already carry dataset, method and predictions.
inline void assemble_report(EvaluationReport& report) {
  std::map<std::string, RandomGuessBaseline> baselines;
  for (auto& d : report.datasets) {
    std::vector<double> efforts;
    for (const auto& r : report.runs)
      if (r.dataset == d.name) {
        for (const auto& p : r.predictions) efforts.push_back(p.actual);
        break;
      }
    if (efforts.empty()) continue;
    BaselineMode mode = report.baseline;
    const auto idx = static_cast<std::uint64_t>(&d - report.datasets.data());
    if (mode.kind == BaselineMode::Kind::Sampled) mode.seed = derive_seed(report.config.value("seed", std::uint64_t{0}), 0xba5e0000ULL + idx);
    const RandomGuessBaseline b = random_guess_baseline(efforts, mode);
    d.baseline_mae = b.mae_p0;
    d.baseline_sd = b.sp0;
    baselines[d.name] = b;
  }

  for (auto& r : report.runs) r.metrics = evaluate(r.predictions, baselines.at(r.dataset));
  for (auto& r : report.runs) {
    r.effect_reference.reset();
    r.effect_vs_reference.reset();
    const auto ref = effect_reference_of(r.method);
    if (!ref) continue;
    const MethodRun* parent = report.find(r.dataset, *ref);
    if (!parent) continue;
    const auto errs = absolute_errors(parent->predictions);
    const double sd = sample_sd(errs);
    r.effect_reference = *ref;
    if (sd > 0.0) r.effect_vs_reference = effect_size(r.metrics.mae, parent->metrics.mae, sd);
  }

  report.comparisons.clear();
  report.win_tie_loss.clear();
  report.win_tie_loss_total.clear();
  report.ranks.clear();
  std::map<Measure, std::map<std::string, std::map<std::string, double>>> rank_tables;
  for (const auto& d : report.datasets) {
    std::map<std::string, std::vector<double>> errors;
    MeasureTable values;
    for (const auto& r : report.runs) {
      if (r.dataset != d.name) continue;
      errors[r.method] = absolute_errors(r.predictions);
      for (Measure m : kAllMeasures) {
        values[r.method][m] = measure_value(r.metrics, m);
        rank_tables[m][d.name][r.method] = measure_value(r.metrics, m);
      }
    }
    if (errors.size() < 2) continue;
    auto cmp = compare_methods(errors, values, kAllMeasures);
    const auto t = tally(cmp);
    for (const auto& [method, tl] : t) report.win_tie_loss_total[method] += tl;
    report.win_tie_loss[d.name] = t;
    report.comparisons[d.name] = std::move(cmp);
  }
  for (const auto& [m, table] : rank_tables) {
    if (table.empty() || table.begin()->second.size() < 2) continue;
    auto summary = rank_methods(table, m);
    report.ranks.insert(report.ranks.end(), summary.begin(), summary.end());
  }
}

// Re-derives every metric suite from the stored pairs and the dataset's
// baseline; throws if anything disagrees.
inline void verify_report(const EvaluationReport& report) {
  for (const auto& r : report.runs) {
    const auto d = std::find_if(report.datasets.begin(), report.datasets.end(),
                                [&](const DatasetSummary& s) { return s.name == r.dataset; });
    if (d == report.datasets.end()) throw Error("report run references unknown dataset '" + r.dataset + "'");
    const RandomGuessBaseline b{d->baseline_mae, d->baseline_sd, report.baseline};
    const MetricSuite s = evaluate(r.predictions, b);
    auto same = [](double a, double c) { return a == c || (std::isnan(a) && std::isnan(c)); };
    if (!same(s.mae, r.metrics.mae) || !same(s.sa, r.metrics.sa) || !same(s.mbre, r.metrics.mbre) ||
        !same(s.mibre, r.metrics.mibre) || !same(s.lsd, r.metrics.lsd) || s.n != r.metrics.n ||
        s.effect_size.has_value() != r.metrics.effect_size.has_value() ||
        (s.effect_size && !same(*s.effect_size, *r.metrics.effect_size)))
      throw Error("recompute check failed for " + r.dataset + "/" + r.method);
  }
}

inline std::vector<std::string> report_notes(bool honest, const std::vector<std::string>& methods) {
  std::vector<std::string> notes;
  bool local = false;
  bool global = false;
  for (const auto& m : methods) {
    local = local || m.starts_with("LT");
    global = global || m.starts_with("GT");
  }
  if (local && !honest)
    notes.push_back("LT mode LocalOracle: each fold's optimizer scores candidates against the held-out project's actual effort.");
  if (local && honest)
    notes.push_back("LT mode LocalHonest: each fold's optimizer scores leave-one-out aggregates over its training projects only.");
  if (global)
    notes.push_back("GT is tuned once per dataset with leave-one-out fitness over all projects; the shared solution has seen every test project during tuning.");
  notes.push_back("Win-tie-loss: one Wilcoxon rank-sum test (alpha 0.05, two-sided) on absolute errors per unordered method pair; tallies are summed over MAE, SA, MBRE, MIBRE and LSD.");
  return notes;
}

struct LoadedDataset {
  DatasetSummary summary;
  StandardizedDataset data;
};

inline LoadedDataset load_standardized(const DatasetConfig& dc) {
  const Dataset raw = load_dataset(dc.path, dc.schema, dc.name);
  const Dataset clean = preprocess(raw);
  StandardizedDataset sd = standardize(clean);
  DatasetSummary s{dc.name, raw.size(), clean.size(), sd.feature_count(), 0.0, 0.0};
  return {s, std::move(sd)};
}

inline EvaluationReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  EvaluationReport report;
  report.config = config_echo(cfg);
  report.baseline = cfg.baseline;
  report.notes = report_notes(cfg.honest, cfg.methods);

  for (std::size_t di = 0; di < cfg.datasets.size(); ++di) {
    const auto& dc = cfg.datasets[di];
    LoadedDataset loaded = [&] {
      try {
        return load_standardized(dc);
      } catch (const ValidationError& e) {
        throw ValidationError("dataset '" + dc.name + "': " + e.what());
      }
    }();
    report.datasets.push_back(loaded.summary);
    for (const auto& method : cfg.methods) {
      mopso::MopsoConfig mcfg = cfg.mopso;
      mcfg.seed = cell_seed(*cfg.seed, di, method);
      mcfg.threads = cfg.threads;
      try {
        report.runs.push_back(run_loocv(loaded.data, method, mcfg, cfg.honest));
      } catch (const ValidationError& e) {
        throw ValidationError("dataset '" + dc.name + "', method " + method + ": " + e.what());
      } catch (const std::exception& e) {
        throw Error("dataset '" + dc.name + "', method " + method + ": " + e.what());
      }
    }
  }
  assemble_report(report);
  verify_report(report);
  return report;
}

}  // namespace abe

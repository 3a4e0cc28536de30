#pragma once

// Report serialization: CSV tables, markdown summary, JSON with a reader,
// k-histogram data files, and a reader for prediction CSVs.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "abe/config.hpp"
#include "abe/error.hpp"
#include "abe/harness.hpp"

namespace abe {

enum class ReportFormat { Csv, Markdown, Json };

namespace detail {

inline std::string full_precision(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string four_digits(double x) {
  if (!std::isfinite(x)) return "n/a";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

inline json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline double number(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

inline json optional_number(const std::optional<double>& x) { return x ? number(*x) : json(nullptr); }

inline std::optional<double> optional_number(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

inline std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  return out;
}

inline std::vector<std::string> methods_in_order(const EvaluationReport& r) {
  std::vector<std::string> methods;
  for (const auto& run : r.runs)
    if (std::find(methods.begin(), methods.end(), run.method) == methods.end()) methods.push_back(run.method);
  return methods;
}

}  // namespace detail

// ---- JSON ----------------------------------------------------------------

inline json to_json(const MetricSuite& s) {
  return {{"MAE", detail::number(s.mae)},   {"SA", detail::number(s.sa)},       {"MBRE", detail::number(s.mbre)},
          {"MIBRE", detail::number(s.mibre)}, {"LSD", detail::number(s.lsd)}, {"effect_size", detail::optional_number(s.effect_size)},
          {"n", s.n}};
}

inline MetricSuite metric_suite_from_json(const json& j) {
  MetricSuite s;
  s.mae = detail::number(j.at("MAE"));
  s.sa = detail::number(j.at("SA"));
  s.mbre = detail::number(j.at("MBRE"));
  s.mibre = detail::number(j.at("MIBRE"));
  s.lsd = detail::number(j.at("LSD"));
  s.effect_size = detail::optional_number(j.at("effect_size"));
  s.n = j.at("n").get<std::size_t>();
  return s;
}

inline json to_json(const EvaluationReport& r) {
  json j;
  j["engine_version"] = r.engine_version;
  j["config"] = r.config;
  j["baseline"] = r.baseline.kind == BaselineMode::Kind::Exact
                      ? json{{"kind", "exact"}}
                      : json{{"kind", "sampled"}, {"runs", r.baseline.runs}, {"seed", r.baseline.seed}};
  j["notes"] = r.notes;

  json datasets = json::array();
  for (const auto& d : r.datasets)
    datasets.push_back({{"name", d.name},
                        {"rows_raw", d.rows_raw},
                        {"rows_used", d.rows_used},
                        {"features", d.features},
                        {"baseline_mae", detail::number(d.baseline_mae)},
                        {"baseline_sd", detail::number(d.baseline_sd)}});
  j["datasets"] = datasets;

  json runs = json::array();
  for (const auto& run : r.runs) {
    json preds = json::array();
    for (const auto& p : run.predictions) preds.push_back({detail::number(p.actual), detail::number(p.predicted)});
    json sols = json::array();
    for (const auto& s : run.solutions) sols.push_back({{"k", s.k}, {"mask", s.mask}, {"weights", s.weights}});
    runs.push_back({{"dataset", run.dataset},
                    {"method", run.method},
                    {"mode", run.mode},
                    {"metrics", to_json(run.metrics)},
                    {"effect_reference", run.effect_reference ? json(*run.effect_reference) : json(nullptr)},
                    {"effect_vs_reference", detail::optional_number(run.effect_vs_reference)},
                    {"best_k", run.best_k ? json(*run.best_k) : json(nullptr)},
                    {"predictions", preds},
                    {"solutions", sols}});
  }
  j["runs"] = runs;

  json comparisons = json::object();
  for (const auto& [dataset, list] : r.comparisons) {
    json arr = json::array();
    for (const auto& c : list) {
      json outcomes = json::object();
      for (const auto& [m, o] : c.outcomes) outcomes[std::string(to_string(m))] = std::string(to_string(o));
      arr.push_back({{"method_a", c.method_a}, {"method_b", c.method_b}, {"p_value", detail::number(c.p_value)},
                     {"outcomes", outcomes}});
    }
    comparisons[dataset] = arr;
  }
  j["comparisons"] = comparisons;

  auto tallies = [](const std::map<std::string, Tally>& t) {
    json o = json::object();
    for (const auto& [m, v] : t) o[m] = {{"win", v.win}, {"tie", v.tie}, {"loss", v.loss}};
    return o;
  };
  json wtl = json::object();
  for (const auto& [dataset, t] : r.win_tie_loss) wtl[dataset] = tallies(t);
  j["win_tie_loss"] = wtl;
  j["win_tie_loss_total"] = tallies(r.win_tie_loss_total);

  json ranks = json::array();
  for (const auto& s : r.ranks)
    ranks.push_back({{"method", s.method},
                     {"measure", std::string(to_string(s.measure))},
                     {"mean_rank", detail::number(s.mean_rank)},
                     {"rank_sd", detail::number(s.rank_sd)}});
  j["ranks"] = ranks;
  return j;
}

inline Outcome outcome_from_string(const std::string& s) {
  if (s == "win") return Outcome::Win;
  if (s == "tie") return Outcome::Tie;
  if (s == "loss") return Outcome::Loss;
  throw ParseError(0, 0, "unknown outcome '" + s + "'");
}

inline EvaluationReport report_from_json(const json& j) {
  EvaluationReport r;
  try {
    r.engine_version = j.at("engine_version").get<std::string>();
    r.config = j.at("config");
    const json& b = j.at("baseline");
    if (b.at("kind").get<std::string>() == "exact")
      r.baseline = BaselineMode::exact();
    else
      r.baseline = BaselineMode::sampled(b.at("runs").get<std::size_t>(), b.at("seed").get<std::uint64_t>());
    r.notes = j.at("notes").get<std::vector<std::string>>();
    for (const auto& d : j.at("datasets"))
      r.datasets.push_back({d.at("name").get<std::string>(), d.at("rows_raw").get<std::size_t>(),
                            d.at("rows_used").get<std::size_t>(), d.at("features").get<std::size_t>(),
                            detail::number(d.at("baseline_mae")), detail::number(d.at("baseline_sd"))});
    for (const auto& x : j.at("runs")) {
      MethodRun run;
      run.dataset = x.at("dataset").get<std::string>();
      run.method = x.at("method").get<std::string>();
      run.mode = x.at("mode").get<std::string>();
      run.metrics = metric_suite_from_json(x.at("metrics"));
      if (!x.at("effect_reference").is_null()) run.effect_reference = x.at("effect_reference").get<std::string>();
      run.effect_vs_reference = detail::optional_number(x.at("effect_vs_reference"));
      if (!x.at("best_k").is_null()) run.best_k = x.at("best_k").get<std::size_t>();
      for (const auto& p : x.at("predictions")) run.predictions.push_back({detail::number(p.at(0)), detail::number(p.at(1))});
      for (const auto& s : x.at("solutions"))
        run.solutions.push_back({s.at("k").get<std::size_t>(), s.at("mask").get<std::string>(),
                                 s.at("weights").get<std::vector<std::vector<double>>>()});
      r.runs.push_back(std::move(run));
    }
    for (const auto& [dataset, arr] : j.at("comparisons").items()) {
      auto& list = r.comparisons[dataset];
      for (const auto& c : arr) {
        ComparisonResult cr{c.at("method_a").get<std::string>(), c.at("method_b").get<std::string>(),
                            detail::number(c.at("p_value")), {}};
        for (const auto& [m, o] : c.at("outcomes").items()) cr.outcomes[measure_from_string(m)] = outcome_from_string(o.get<std::string>());
        list.push_back(std::move(cr));
      }
    }
    auto tallies = [](const json& o) {
      std::map<std::string, Tally> t;
      for (const auto& [m, v] : o.items())
        t[m] = {v.at("win").get<std::size_t>(), v.at("tie").get<std::size_t>(), v.at("loss").get<std::size_t>()};
      return t;
    };
    for (const auto& [dataset, o] : j.at("win_tie_loss").items()) r.win_tie_loss[dataset] = tallies(o);
    r.win_tie_loss_total = tallies(j.at("win_tie_loss_total"));
    for (const auto& s : j.at("ranks"))
      r.ranks.push_back({s.at("method").get<std::string>(), measure_from_string(s.at("measure").get<std::string>()),
                         detail::number(s.at("mean_rank")), detail::number(s.at("rank_sd"))});
  } catch (const json::exception& e) {
    throw ParseError(0, 0, std::string("malformed report JSON: ") + e.what());
  }
  return r;
}

// ---- CSV -----------------------------------------------------------------

// Rows = datasets, columns = method.measure for MAE, SA, MBRE, MIBRE, LSD.
inline void write_metrics_csv(const EvaluationReport& r, std::ostream& out) {
  const auto methods = detail::methods_in_order(r);
  out << "dataset";
  for (const auto& m : methods)
    for (Measure ms : kAllMeasures) out << ',' << m << '.' << to_string(ms);
  out << '\n';
  for (const auto& d : r.datasets) {
    out << d.name;
    for (const auto& m : methods) {
      const MethodRun* run = r.find(d.name, m);
      for (Measure ms : kAllMeasures) out << ',' << (run ? detail::full_precision(measure_value(run->metrics, ms)) : "");
    }
    out << '\n';
  }
}

inline void write_comparisons_csv(const EvaluationReport& r, std::ostream& out) {
  out << "dataset,method_a,method_b,p_value";
  for (Measure m : kAllMeasures) out << ',' << to_string(m);
  out << '\n';
  for (const auto& [dataset, list] : r.comparisons)
    for (const auto& c : list) {
      out << dataset << ',' << c.method_a << ',' << c.method_b << ',' << detail::full_precision(c.p_value);
      for (Measure m : kAllMeasures) {
        const auto it = c.outcomes.find(m);
        out << ',' << (it == c.outcomes.end() ? "" : to_string(it->second));
      }
      out << '\n';
    }
}

inline void write_win_tie_loss_csv(const EvaluationReport& r, std::ostream& out) {
  out << "dataset,method,win,tie,loss,win_minus_loss\n";
  auto row = [&](const std::string& d, const std::string& m, const Tally& t) {
    out << d << ',' << m << ',' << t.win << ',' << t.tie << ',' << t.loss << ','
        << static_cast<long long>(t.win) - static_cast<long long>(t.loss) << '\n';
  };
  for (const auto& [dataset, t] : r.win_tie_loss)
    for (const auto& [m, v] : t) row(dataset, m, v);
  for (const auto& [m, v] : r.win_tie_loss_total) row("ALL", m, v);
}

inline void write_predictions_csv(const EvaluationReport& r, std::ostream& out) {
  out << "dataset,method,project,actual,predicted\n";
  for (const auto& run : r.runs)
    for (std::size_t i = 0; i < run.predictions.size(); ++i)
      out << run.dataset << ',' << run.method << ',' << i << ',' << detail::full_precision(run.predictions[i].actual)
          << ',' << detail::full_precision(run.predictions[i].predicted) << '\n';
}

inline void write_ranks_csv(const EvaluationReport& r, std::ostream& out) {
  out << "measure,method,mean_rank,rank_sd\n";
  for (const auto& s : r.ranks)
    out << to_string(s.measure) << ',' << s.method << ',' << detail::full_precision(s.mean_rank) << ','
        << detail::full_precision(s.rank_sd) << '\n';
}

// ---- Markdown ------------------------------------------------------------

inline void write_markdown(const EvaluationReport& r, std::ostream& out) {
  const auto methods = detail::methods_in_order(r);
  out << "# Evaluation report\n\n";
  out << "- engine: " << r.engine_version << '\n';
  const json cfg = r.config.is_object() ? r.config : json::object();
  if (cfg.contains("mode")) out << "- mode: " << cfg["mode"].get<std::string>() << '\n';
  if (cfg.contains("seed")) out << "- seed: " << cfg["seed"].get<std::uint64_t>() << '\n';
  out << "- baseline: "
      << (r.baseline.kind == BaselineMode::Kind::Exact ? std::string("exact")
                                                       : "sampled, " + std::to_string(r.baseline.runs) + " runs")
      << "\n\n";
  if (!r.notes.empty()) {
    out << "## Notes\n\n";
    for (const auto& n : r.notes) out << "- " << n << '\n';
    out << '\n';
  }

  out << "## Datasets\n\n| dataset | rows | used | features | MAE_p0 | SP0 |\n|---|---|---|---|---|---|\n";
  for (const auto& d : r.datasets)
    out << "| " << d.name << " | " << d.rows_raw << " | " << d.rows_used << " | " << d.features << " | "
        << detail::four_digits(d.baseline_mae) << " | " << detail::four_digits(d.baseline_sd) << " |\n";
  out << '\n';

  out << "## Accuracy\n\nSA in percent; effect size against random guessing, reference effect size against the "
         "unrestricted variant.\n\n";
  for (const auto& d : r.datasets) {
    out << "### " << d.name << "\n\n| method | mode | MAE | SA (%) | MBRE | MIBRE | LSD | effect | ref. effect | k |\n"
        << "|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& m : methods) {
      const MethodRun* run = r.find(d.name, m);
      if (!run) continue;
      const auto& s = run->metrics;
      std::string k = "-";
      if (run->best_k)
        k = std::to_string(*run->best_k);
      else if (run->solutions.size() == 1)
        k = std::to_string(run->solutions[0].k);
      else if (!run->solutions.empty())
        k = "per project";
      out << "| " << m << " | " << run->mode << " | " << detail::four_digits(s.mae) << " | "
          << detail::four_digits(100.0 * s.sa) << " | " << detail::four_digits(s.mbre) << " | "
          << detail::four_digits(s.mibre) << " | " << detail::four_digits(s.lsd) << " | "
          << (s.effect_size ? detail::four_digits(*s.effect_size) : "n/a") << " | "
          << (run->effect_vs_reference ? detail::four_digits(*run->effect_vs_reference) + " vs " + *run->effect_reference
                                       : "-")
          << " | " << k << " |\n";
    }
    out << '\n';
  }

  if (!r.comparisons.empty()) {
    out << "## Pairwise Wilcoxon rank-sum on absolute errors\n\n| dataset | A | B | p |";
    for (Measure m : kAllMeasures) out << ' ' << to_string(m) << " (A) |";
    out << "\n|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& [dataset, list] : r.comparisons)
      for (const auto& c : list) {
        out << "| " << dataset << " | " << c.method_a << " | " << c.method_b << " | " << detail::four_digits(c.p_value)
            << " |";
        for (Measure m : kAllMeasures) {
          const auto it = c.outcomes.find(m);
          out << ' ' << (it == c.outcomes.end() ? "-" : to_string(it->second)) << " |";
        }
        out << '\n';
      }
    out << "\n## Win-tie-loss (all datasets, all measures)\n\n| method | win | tie | loss | win - loss |\n"
        << "|---|---|---|---|---|\n";
    for (const auto& [m, t] : r.win_tie_loss_total)
      out << "| " << m << " | " << t.win << " | " << t.tie << " | " << t.loss << " | "
          << static_cast<long long>(t.win) - static_cast<long long>(t.loss) << " |\n";
    out << '\n';
  }

  if (!r.ranks.empty()) {
    out << "## Ranks across datasets\n\n| measure | method | mean rank | SD |\n|---|---|---|---|\n";
    for (const auto& s : r.ranks)
      out << "| " << to_string(s.measure) << " | " << s.method << " | " << detail::four_digits(s.mean_rank) << " | "
          << detail::four_digits(s.rank_sd) << " |\n";
    out << '\n';
  }
}

// ---- Files ---------------------------------------------------------------

// gnuplot-ready "k count" lines, one file per locally tuned run.
inline std::vector<std::filesystem::path> write_k_histograms(const EvaluationReport& r, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  for (const auto& run : r.runs) {
    if (run.solutions.size() < 2) continue;
    std::map<std::size_t, std::size_t> hist;
    for (std::size_t k : run.k_values()) ++hist[k];
    const auto path = dir / ("khist_" + run.dataset + "_" + method_slug(run.method) + ".dat");
    auto out = detail::open_output(path);
    out << "# k count (" << run.dataset << ", " << run.method << ")\n";
    for (const auto& [k, c] : hist) out << k << ' ' << c << '\n';
    written.push_back(path);
  }
  return written;
}

inline std::vector<std::filesystem::path> emit_report(const EvaluationReport& r, ReportFormat format,
                                                      const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  auto file = [&](const char* name, auto&& writer) {
    const auto path = dir / name;
    auto out = detail::open_output(path);
    writer(r, out);
    if (!out) throw Error("failed writing '" + path.string() + "'");
    written.push_back(path);
  };
  switch (format) {
    case ReportFormat::Csv:
      file("metrics.csv", write_metrics_csv);
      file("comparisons.csv", write_comparisons_csv);
      file("win_tie_loss.csv", write_win_tie_loss_csv);
      file("predictions.csv", write_predictions_csv);
      file("ranks.csv", write_ranks_csv);
      for (auto& p : write_k_histograms(r, dir)) written.push_back(p);
      break;
    case ReportFormat::Markdown:
      file("report.md", write_markdown);
      break;
    case ReportFormat::Json:
      file("report.json", [](const EvaluationReport& rep, std::ostream& out) { out << to_json(rep).dump(2) << '\n'; });
      break;
  }
  return written;
}

// ---- Prediction files ----------------------------------------------------

// Reads the long-format predictions CSV written by write_predictions_csv
// into a report skeleton (datasets and runs, no metrics yet).
inline EvaluationReport read_predictions_csv(std::istream& in) {
  EvaluationReport r;
  std::string line;
  std::size_t row = 0;
  if (!std::getline(in, line)) throw ParseError(1, 0, "empty predictions file");
  ++row;
  const auto header = detail::split_csv_line(line);
  const std::vector<std::string> expected{"dataset", "method", "project", "actual", "predicted"};
  if (header != expected) throw ParseError(1, 0, "expected header dataset,method,project,actual,predicted");
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != 5) throw ParseError(row, 0, "expected 5 cells, got " + std::to_string(cells.size()));
    const auto actual = detail::parse_number(cells[3]);
    const auto predicted = detail::parse_number(cells[4]);
    if (!actual || !(*actual > 0.0)) throw ParseError(row, 4, "actual effort must be a positive number");
    if (!predicted) throw ParseError(row, 5, "predicted effort must be a number");
    const std::string method = canonical_method(cells[1]);
    MethodRun* run = nullptr;
    for (auto& x : r.runs)
      if (x.dataset == cells[0] && x.method == method) run = &x;
    if (!run) {
      r.runs.push_back({});
      run = &r.runs.back();
      run->dataset = cells[0];
      run->method = method;
      run->mode = "external";
      if (std::none_of(r.datasets.begin(), r.datasets.end(), [&](const DatasetSummary& d) { return d.name == cells[0]; }))
        r.datasets.push_back({cells[0], 0, 0, 0, 0.0, 0.0});
    }
    const auto idx = detail::parse_number(cells[2]);
    if (!idx || *idx != static_cast<double>(run->predictions.size()))
      throw ParseError(row, 3, "project indices must run 0, 1, 2, ... per dataset and method");
    run->predictions.push_back({*actual, *predicted});
  }
  for (auto& d : r.datasets) {
    const MethodRun* first = nullptr;
    for (const auto& run : r.runs) {
      if (run.dataset != d.name) continue;
      if (!first) {
        first = &run;
        continue;
      }
      if (run.predictions.size() != first->predictions.size())
        throw ParseError(0, 0, "dataset '" + d.name + "': methods cover different numbers of projects");
      for (std::size_t i = 0; i < run.predictions.size(); ++i)
        if (run.predictions[i].actual != first->predictions[i].actual)
          throw ParseError(0, 0, "dataset '" + d.name + "': actual efforts differ between methods at project " +
                                     std::to_string(i));
    }
    d.rows_raw = d.rows_used = first->predictions.size();
  }
  return r;
}

}  // namespace abe

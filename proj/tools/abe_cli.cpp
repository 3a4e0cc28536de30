// Command-line front end: run, tune, compare, validate.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "abe/abe.hpp"

namespace {

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<unsigned> threads;
  std::string mode;
};

abe::ExperimentConfig load_with_overrides(const GlobalOptions& g) {
  if (g.config.empty()) throw abe::ConfigError("--config is required");
  abe::ExperimentConfig cfg = abe::load_config(g.config);
  if (g.seed) cfg.seed = *g.seed;
  if (g.threads) cfg.threads = *g.threads;
  if (!g.out.empty()) cfg.out = g.out;
  if (g.mode == "honest") cfg.honest = true;
  if (g.mode == "oracle") cfg.honest = false;
  return cfg;
}

int cmd_run(const GlobalOptions& g) {
  const abe::ExperimentConfig cfg = load_with_overrides(g);
  const abe::EvaluationReport report = abe::run_experiment(cfg);
  for (auto format : {abe::ReportFormat::Csv, abe::ReportFormat::Markdown, abe::ReportFormat::Json})
    abe::emit_report(report, format, cfg.out);
  std::cout << "wrote report to " << cfg.out.string() << '\n';
  for (const auto& run : report.runs)
    std::cout << run.dataset << ' ' << run.method << ": MAE " << abe::detail::four_digits(run.metrics.mae) << ", SA "
              << abe::detail::four_digits(100.0 * run.metrics.sa) << "%\n";
  return 0;
}

int cmd_tune(const GlobalOptions& g, const std::string& dataset, const std::string& method) {
  abe::ExperimentConfig cfg = load_with_overrides(g);
  cfg.methods = {abe::canonical_method(method)};
  cfg.validate();
  std::size_t index = cfg.datasets.size();
  for (std::size_t i = 0; i < cfg.datasets.size(); ++i)
    if (cfg.datasets[i].name == dataset || (dataset.empty() && cfg.datasets.size() == 1)) index = i;
  if (index == cfg.datasets.size())
    throw abe::ConfigError(dataset.empty() ? "--dataset is required when the config lists several datasets"
                                           : "dataset '" + dataset + "' is not in the config");

  const auto loaded = abe::load_standardized(cfg.datasets[index]);
  abe::mopso::MopsoConfig mcfg = cfg.mopso;
  mcfg.seed = abe::cell_seed(*cfg.seed, index, cfg.methods[0]);
  mcfg.threads = cfg.threads;
  abe::MethodRun run = abe::run_loocv(loaded.data, cfg.methods[0], mcfg, cfg.honest);
  const auto baseline = abe::random_guess_baseline(loaded.data.efforts(), cfg.baseline);
  run.metrics = abe::evaluate(run.predictions, baseline);

  std::cout << "dataset " << loaded.summary.name << " (" << loaded.summary.rows_used << " projects, "
            << loaded.summary.features << " features), method " << run.method << ", mode " << run.mode << '\n';
  if (run.best_k) std::cout << "best k " << *run.best_k << '\n';
  if (run.solutions.size() == 1)
    std::cout << "shared solution: k " << run.solutions[0].k << ", mask " << run.solutions[0].mask << '\n';
  std::cout << "project,actual,predicted" << (run.solutions.size() > 1 ? ",k,mask" : "") << '\n';
  for (std::size_t i = 0; i < run.predictions.size(); ++i) {
    std::cout << i << ',' << abe::detail::full_precision(run.predictions[i].actual) << ','
              << abe::detail::full_precision(run.predictions[i].predicted);
    if (run.solutions.size() > 1) std::cout << ',' << run.solutions[i].k << ',' << run.solutions[i].mask;
    std::cout << '\n';
  }
  const auto& s = run.metrics;
  std::cout << "MAE " << abe::detail::four_digits(s.mae) << ", SA " << abe::detail::four_digits(100.0 * s.sa)
            << "%, MBRE " << abe::detail::four_digits(s.mbre) << ", MIBRE " << abe::detail::four_digits(s.mibre)
            << ", LSD " << abe::detail::four_digits(s.lsd) << '\n';
  return 0;
}

int cmd_compare(const GlobalOptions& g, const std::string& predictions) {
  std::ifstream in(predictions);
  if (!in) throw abe::ConfigError("cannot open predictions file '" + predictions + "'");
  abe::EvaluationReport report = abe::read_predictions_csv(in);
  report.config = {{"source", std::filesystem::path(predictions).filename().string()}};
  report.notes = {"Metrics recomputed from an existing predictions file; exact random-guess baseline."};
  abe::assemble_report(report);
  abe::verify_report(report);
  abe::write_markdown(report, std::cout);
  if (!g.out.empty())
    for (auto format : {abe::ReportFormat::Csv, abe::ReportFormat::Markdown, abe::ReportFormat::Json})
      abe::emit_report(report, format, g.out);
  return 0;
}

int cmd_validate(const GlobalOptions& g) {
  const abe::ExperimentConfig cfg = load_with_overrides(g);
  cfg.validate();
  std::cout << "config ok: " << cfg.datasets.size() << " dataset(s), methods";
  for (const auto& m : cfg.methods) std::cout << ' ' << m;
  std::cout << ", mode " << (cfg.honest ? "honest" : "oracle") << '\n';
  int failures = 0;
  for (const auto& dc : cfg.datasets) {
    try {
      const auto loaded = abe::load_standardized(dc);
      std::cout << dc.name << ": " << loaded.summary.rows_raw << " rows, " << loaded.summary.rows_used
                << " complete, " << loaded.summary.features << " input features\n";
    } catch (const abe::ValidationError& e) {
      std::cerr << dc.name << ": " << e.what() << '\n';
      ++failures;
    }
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analogy-based effort estimation with multi-objective tuning"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--config", g.config, "experiment config (JSON)");
  app.add_option("--seed", g.seed, "base seed, overrides the config");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--mode", g.mode, "local tuning mode")->check(CLI::IsMember({"oracle", "honest"}));

  auto* run = app.add_subcommand("run", "run every configured method on every dataset and write reports");
  auto* tune = app.add_subcommand("tune", "tune one method on one dataset and print the chosen solutions");
  std::string dataset;
  std::string method = "LT";
  tune->add_option("--dataset", dataset, "dataset name from the config");
  tune->add_option("--method", method, "ABE0, LT, GT, LT*, GT*, LT+ or GT+");
  auto* compare = app.add_subcommand("compare", "statistics over an existing predictions.csv");
  std::string predictions;
  compare->add_option("--predictions", predictions, "long-format predictions CSV")->required();
  auto* validate = app.add_subcommand("validate", "check the config and lint every dataset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(g);
    if (*tune) return cmd_tune(g, dataset, method);
    if (*compare) return cmd_compare(g, predictions);
    if (*validate) return cmd_validate(g);
  } catch (const abe::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

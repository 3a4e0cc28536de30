#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "../common/support.hpp"

using namespace abe;
using namespace abe::testing;

namespace {

ExperimentConfig small_experiment(std::vector<std::string> methods, std::vector<std::string> files = {"telecom_like"}) {
  ExperimentConfig cfg;
  for (const auto& f : files) {
    const std::string effort = f == "telecom_like" || f == "small8" ? "effort" : "Effort";
    cfg.datasets.push_back({data_path("synthetic/" + f + ".csv"), f, Schema{effort, {}, {}}});
  }
  cfg.methods = std::move(methods);
  cfg.mopso.pop_size = 12;
  cfg.mopso.max_iter = 10;
  cfg.seed = 17;
  return cfg;
}

std::string csv_of(const EvaluationReport& r) {
  std::ostringstream s;
  write_metrics_csv(r, s);
  write_predictions_csv(r, s);
  write_comparisons_csv(r, s);
  write_win_tie_loss_csv(r, s);
  return s.str();
}

}  // namespace

TEST(Harness, ThreeProjectsGiveThreeFolds) {
  const auto ds = numeric_dataset({{0.0}, {0.5}, {1.0}}, {3, 6, 9});
  mopso::MopsoConfig cfg;
  cfg.pop_size = 5;
  cfg.max_iter = 3;
  for (const char* m : {"ABE0", "LT", "GT"}) {
    const auto run = run_loocv(ds, m, cfg);
    EXPECT_EQ(run.predictions.size(), 3u) << m;
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(run.predictions[i].actual, ds.effort(i));
  }
  const auto lt = run_loocv(ds, "LT", cfg);
  for (const auto& s : lt.solutions) EXPECT_LE(s.k, 2u);
}

TEST(Harness, RepeatedRunsAgree) {
  const auto ds = load_standard("synthetic/small8.csv", "effort");
  mopso::MopsoConfig cfg;
  cfg.pop_size = 10;
  cfg.max_iter = 8;
  cfg.seed = 3;
  const auto a = run_loocv(ds, "LT*", cfg);
  const auto b = run_loocv(ds, "LT*", cfg);
  for (std::size_t i = 0; i < a.predictions.size(); ++i) EXPECT_EQ(a.predictions[i].predicted, b.predictions[i].predicted);
  EXPECT_EQ(a.solutions, b.solutions);
}

TEST(Harness, Abe0PredictsDuplicateExactly) {
  const auto ds = numeric_dataset({{0.1, 0.2}, {0.9, 0.8}, {0.1, 0.2}, {0.5, 0.4}}, {40, 12, 40, 25});
  const auto b = best_k_abe0(ds);
  EXPECT_EQ(b.k, 1u);
  const auto run = run_loocv(ds, "ABE0", mopso::MopsoConfig{});
  EXPECT_EQ(run.predictions[0].predicted, 40.0);
  EXPECT_EQ(run.predictions[2].predicted, 40.0);
}

TEST(Harness, TwoMethodsOneComparison) {
  const auto r = run_experiment(small_experiment({"ABE0", "LT"}));
  EXPECT_EQ(r.runs.size(), 2u);
  ASSERT_EQ(r.comparisons.at("telecom_like").size(), 1u);
  EXPECT_EQ(r.comparisons.at("telecom_like")[0].outcomes.size(), 5u);
  EXPECT_TRUE(r.find("telecom_like", "ABE0")->best_k.has_value());
  EXPECT_EQ(r.find("telecom_like", "LT")->mode, "LocalOracle");
}

TEST(Harness, RerunIsByteIdentical) {
  const auto cfg = small_experiment({"ABE0", "GT", "LT+"});
  EXPECT_EQ(csv_of(run_experiment(cfg)), csv_of(run_experiment(cfg)));
}

TEST(Harness, CellSeedIgnoresOtherMethods) {
  const auto a = run_experiment(small_experiment({"GT"}));
  const auto b = run_experiment(small_experiment({"ABE0", "LT", "GT"}));
  const auto* x = a.find("telecom_like", "GT");
  const auto* y = b.find("telecom_like", "GT");
  ASSERT_TRUE(x && y);
  for (std::size_t i = 0; i < x->predictions.size(); ++i) EXPECT_EQ(x->predictions[i].predicted, y->predictions[i].predicted);
}

TEST(Harness, InvalidConfigs) {
  EXPECT_THROW(run_experiment(small_experiment({})), ConfigError);
  auto cfg = small_experiment({"ABE0"});
  cfg.seed.reset();
  EXPECT_THROW(run_experiment(cfg), ConfigError);
  EXPECT_THROW(canonical_method("LT-"), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"datasets": [], "methods": ["ABE0"], "colour": 1})")), ConfigError);
}

TEST(Harness, MethodAliases) {
  EXPECT_EQ(canonical_method("lt_star"), "LT*");
  EXPECT_EQ(canonical_method("GTplus"), "GT+");
  EXPECT_EQ(canonical_method("abe0"), "ABE0");
  EXPECT_EQ(method_slug("LT*"), "LT_star");
}

TEST(Harness, EffectAgainstReference) {
  const auto r = run_experiment(small_experiment({"LT", "LT+"}));
  const auto* plus = r.find("telecom_like", "LT+");
  ASSERT_TRUE(plus->effect_vs_reference.has_value());
  EXPECT_EQ(plus->effect_reference.value(), "LT");
  const auto* lt = r.find("telecom_like", "LT");
  const auto errs = absolute_errors(lt->predictions);
  EXPECT_NEAR(*plus->effect_vs_reference, std::abs(plus->metrics.mae - lt->metrics.mae) / sample_sd(errs), 1e-12);
}

TEST(Report, MetricsCsvShape) {
  const auto r = run_experiment(small_experiment({"ABE0", "GT+"}, {"telecom_like", "small8"}));
  std::ostringstream s;
  write_metrics_csv(r, s);
  std::istringstream in(s.str());
  std::string line;
  std::vector<std::size_t> cols;
  while (std::getline(in, line)) cols.push_back(static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')));
  ASSERT_EQ(cols.size(), 3u);
  for (std::size_t c : cols) EXPECT_EQ(c, 10u);
}

TEST(Report, MarkdownShowsSaAsPercentage) {
  EvaluationReport r;
  r.datasets.push_back({"albrecht", 24, 24, 7, 10.0, 5.0});
  MethodRun run;
  run.dataset = "albrecht";
  run.method = "ABE0";
  run.mode = "none";
  run.metrics.sa = 0.682;
  r.runs.push_back(run);
  std::ostringstream s;
  write_markdown(r, s);
  EXPECT_NE(s.str().find("68.2"), std::string::npos) << s.str();
}

TEST(Report, JsonRoundTrip) {
  const auto r = run_experiment(small_experiment({"ABE0", "LT", "GT*"}));
  const json j = to_json(r);
  const auto back = report_from_json(j);
  EXPECT_EQ(to_json(back).dump(), j.dump());
  EXPECT_NO_THROW(verify_report(back));
}

TEST(Report, VerifyCatchesTampering) {
  auto r = run_experiment(small_experiment({"ABE0", "LT"}));
  EXPECT_NO_THROW(verify_report(r));
  r.runs[1].metrics.mae += 1e-9;
  EXPECT_THROW(verify_report(r), Error);
}

TEST(Report, EmitWritesFiles) {
  const auto r = run_experiment(small_experiment({"ABE0", "LT"}));
  const auto dir = std::filesystem::temp_directory_path() / "abe_emit_test";
  std::filesystem::remove_all(dir);
  const auto files = emit_report(r, ReportFormat::Csv, dir);
  EXPECT_FALSE(files.empty());
  for (const auto& f : files) EXPECT_TRUE(std::filesystem::exists(f)) << f;
  std::ifstream pred(dir / "predictions.csv");
  const auto back = read_predictions_csv(pred);
  EXPECT_EQ(back.runs.size(), 2u);
  std::filesystem::remove_all(dir);
}

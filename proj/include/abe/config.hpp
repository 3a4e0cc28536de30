#pragma once

// Experiment configuration: JSON parsing, validation and the echo that goes
// into reports.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "abe/data.hpp"
#include "abe/error.hpp"
#include "abe/metrics.hpp"
#include "abe/mopso.hpp"

namespace abe {

using json = nlohmann::json;

inline constexpr std::string_view kEngineVersion = "abe 1.0.0";

// Registered methods in canonical order; the position is part of each
// method's seed derivation.
inline constexpr std::string_view kMethodNames[] = {"ABE0", "LT", "GT", "LT*", "GT*", "LT+", "GT+"};

inline std::string canonical_method(std::string_view name) {
  std::string s;
  for (char c : name) s += static_cast<char>(c >= 'a' && c <= 'z' ? c - 'a' + 'A' : c);
  auto strip = [&](std::string_view suffix, std::string_view replacement) {
    if (s.size() > suffix.size() && s.ends_with(suffix)) s = s.substr(0, s.size() - suffix.size()) + std::string(replacement);
  };
  strip("_STAR", "*");
  strip("STAR", "*");
  strip("_PLUS", "+");
  strip("PLUS", "+");
  strip("\xE2\x81\xBA", "+");  // superscript plus
  for (auto m : kMethodNames)
    if (s == m) return std::string(m);
  throw ConfigError("unknown method '" + std::string(name) + "' (known: ABE0, LT, GT, LT*, GT*, LT+, GT+)");
}

inline std::size_t method_index(std::string_view canonical) {
  for (std::size_t i = 0; i < std::size(kMethodNames); ++i)
    if (kMethodNames[i] == canonical) return i;
  throw ConfigError("unknown method '" + std::string(canonical) + "'");
}

// File-system friendly method name: LT* -> LT_star, GT+ -> GT_plus.
inline std::string method_slug(std::string_view canonical) {
  std::string s(canonical);
  if (s.ends_with('*')) return s.substr(0, s.size() - 1) + "_star";
  if (s.ends_with('+')) return s.substr(0, s.size() - 1) + "_plus";
  return s;
}

struct DatasetConfig {
  std::filesystem::path path;
  std::string name;
  Schema schema;
};

struct ExperimentConfig {
  std::vector<DatasetConfig> datasets;
  std::vector<std::string> methods;  // canonical names
  mopso::MopsoConfig mopso;
  std::optional<std::uint64_t> seed;
  BaselineMode baseline = BaselineMode::exact();
  bool honest = false;  // local tuning without the held-out label
  unsigned threads = 1;
  std::filesystem::path out = "results";

  void validate() const {
    if (datasets.empty()) throw ConfigError("config lists no datasets");
    if (methods.empty()) throw ConfigError("config lists no methods");
    if (!seed) throw ConfigError("config has no seed (set \"seed\" or pass --seed)");
    std::set<std::string> names;
    for (const auto& d : datasets) {
      if (d.name.empty()) throw ConfigError("dataset entry with an empty name");
      if (!names.insert(d.name).second) throw ConfigError("duplicate dataset name '" + d.name + "'");
      if (d.schema.effort_column.empty()) throw ConfigError("dataset '" + d.name + "' has no effort_column");
    }
    std::set<std::string> seen;
    for (const auto& m : methods)
      if (!seen.insert(m).second) throw ConfigError("method '" + m + "' listed twice");
    if (baseline.kind == BaselineMode::Kind::Sampled && baseline.runs < 1)
      throw ConfigError("sampled baseline needs at least one run");
    if (threads < 1) throw ConfigError("threads must be at least 1");
    mopso.validate();
  }
};

namespace detail {

template <class T>
T get_field(const json& j, std::string_view key, std::string_view where) {
  try {
    return j.at(std::string(key)).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(where) + "." + std::string(key) + ": " + e.what());
  }
}

inline void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + std::string(where));
  }
}

inline mopso::MopsoConfig parse_mopso(const json& j) {
  if (!j.is_object()) throw ConfigError("mopso must be an object");
  reject_unknown(j,
                 {"pop_size", "max_iter", "inertia_start", "inertia_end", "c1", "c2", "mutation_fraction",
                  "mutation_exponent", "archive_capacity", "leader_fraction", "mutation_rule"},
                 "mopso");
  mopso::MopsoConfig c;
  auto opt = [&](const char* key, auto& field) {
    if (j.contains(key)) field = get_field<std::decay_t<decltype(field)>>(j, key, "mopso");
  };
  opt("pop_size", c.pop_size);
  opt("max_iter", c.max_iter);
  opt("inertia_start", c.inertia_start);
  opt("inertia_end", c.inertia_end);
  opt("c1", c.c1);
  opt("c2", c.c2);
  opt("mutation_fraction", c.mutation_fraction);
  opt("mutation_exponent", c.mutation_exponent);
  opt("archive_capacity", c.archive_capacity);
  opt("leader_fraction", c.leader_fraction);
  if (j.contains("mutation_rule")) {
    const auto rule = get_field<std::string>(j, "mutation_rule", "mopso");
    if (rule == "printed")
      c.mutation_rule = mopso::MutationRule::AsPrinted;
    else if (rule == "classical")
      c.mutation_rule = mopso::MutationRule::Classical;
    else
      throw ConfigError("mopso.mutation_rule must be \"printed\" or \"classical\"");
  }
  return c;
}

inline json mopso_to_json(const mopso::MopsoConfig& c) {
  return {{"pop_size", c.pop_size},
          {"max_iter", c.max_iter},
          {"inertia_start", c.inertia_start},
          {"inertia_end", c.inertia_end},
          {"c1", c.c1},
          {"c2", c.c2},
          {"mutation_fraction", c.mutation_fraction},
          {"mutation_exponent", c.mutation_exponent},
          {"archive_capacity", c.archive_capacity},
          {"leader_fraction", c.leader_fraction},
          {"mutation_rule", c.mutation_rule == mopso::MutationRule::Classical ? "classical" : "printed"}};
}

}  // namespace detail

// Relative dataset paths resolve against `base_dir`.
inline ExperimentConfig parse_config(const json& j, const std::filesystem::path& base_dir = {}) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  detail::reject_unknown(j, {"datasets", "methods", "mopso", "seed", "baseline", "mode", "threads", "out"}, "config");
  ExperimentConfig cfg;

  if (!j.contains("datasets") || !j["datasets"].is_array()) throw ConfigError("config.datasets must be an array");
  for (const auto& d : j["datasets"]) {
    if (!d.is_object()) throw ConfigError("each dataset entry must be an object");
    detail::reject_unknown(d, {"path", "name", "effort_column", "categorical_columns", "excluded_columns"}, "dataset");
    DatasetConfig dc;
    std::filesystem::path p = detail::get_field<std::string>(d, "path", "dataset");
    dc.path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    dc.name = d.contains("name") ? detail::get_field<std::string>(d, "name", "dataset") : p.stem().string();
    dc.schema.effort_column = detail::get_field<std::string>(d, "effort_column", "dataset");
    if (d.contains("categorical_columns"))
      dc.schema.categorical_columns = detail::get_field<std::vector<std::string>>(d, "categorical_columns", "dataset");
    if (d.contains("excluded_columns"))
      dc.schema.excluded_columns = detail::get_field<std::vector<std::string>>(d, "excluded_columns", "dataset");
    cfg.datasets.push_back(std::move(dc));
  }

  if (!j.contains("methods") || !j["methods"].is_array()) throw ConfigError("config.methods must be an array");
  for (const auto& m : j["methods"]) {
    if (!m.is_string()) throw ConfigError("method names must be strings");
    cfg.methods.push_back(canonical_method(m.get<std::string>()));
  }

  if (j.contains("mopso")) cfg.mopso = detail::parse_mopso(j["mopso"]);
  if (j.contains("seed")) cfg.seed = detail::get_field<std::uint64_t>(j, "seed", "config");

  if (j.contains("baseline")) {
    const json& b = j["baseline"];
    if (b.is_string() && b.get<std::string>() == "exact") {
      cfg.baseline = BaselineMode::exact();
    } else if (b.is_object() && b.size() == 1 && b.contains("sampled")) {
      cfg.baseline = BaselineMode::sampled(detail::get_field<std::size_t>(b, "sampled", "baseline"), 0);
    } else {
      throw ConfigError("baseline must be \"exact\" or {\"sampled\": runs}");
    }
  }

  if (j.contains("mode")) {
    const auto mode = detail::get_field<std::string>(j, "mode", "config");
    if (mode == "oracle")
      cfg.honest = false;
    else if (mode == "honest")
      cfg.honest = true;
    else
      throw ConfigError("mode must be \"oracle\" or \"honest\"");
  }
  if (j.contains("threads")) cfg.threads = detail::get_field<unsigned>(j, "threads", "config");
  if (j.contains("out")) cfg.out = detail::get_field<std::string>(j, "out", "config");
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(j, path.parent_path());
}

// Everything that influences results. Thread count and output location are
// left out so reports do not depend on them; dataset paths are reduced to
// their file names.
inline json config_echo(const ExperimentConfig& cfg) {
  json datasets = json::array();
  for (const auto& d : cfg.datasets)
    datasets.push_back({{"name", d.name},
                        {"file", d.path.filename().string()},
                        {"effort_column", d.schema.effort_column},
                        {"categorical_columns", d.schema.categorical_columns},
                        {"excluded_columns", d.schema.excluded_columns}});
  json baseline = cfg.baseline.kind == BaselineMode::Kind::Exact ? json("exact") : json{{"sampled", cfg.baseline.runs}};
  return {{"datasets", datasets},
          {"methods", cfg.methods},
          {"mopso", detail::mopso_to_json(cfg.mopso)},
          {"seed", cfg.seed.value_or(0)},
          {"baseline", baseline},
          {"mode", cfg.honest ? "honest" : "oracle"}};
}

}  // namespace abe

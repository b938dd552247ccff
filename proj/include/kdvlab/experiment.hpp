#pragma once

#include "kdvlab/io.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace kdvlab {

struct ConfigError {
  std::string path;
  std::string message;
};

struct ValidationResult {
  Json config;  // normalized, defaults filled
  std::vector<ConfigError> errors;
  bool ok() const noexcept { return errors.empty(); }
};

/// Relative file references resolve against base_dir.
ValidationResult validate_config(const Json& raw, const std::filesystem::path& base_dir = ".");

/// FNV-1a over the normalized config, excluding output_dir and threads.
std::string config_hash(const Json& normalized);

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation = "<=";
};

struct RunSummary {
  std::string config_hash;
  std::string experiment;
  std::vector<Check> checks;
  Json measured = Json::object();
  double wall_time = 0.0;
  std::string error;

  bool passed() const;
};

Json summary_to_json(const RunSummary& s);
RunSummary summary_from_json(const Json& j);

/// Runs a validated config, writing artifacts and summary.json under out_dir.
RunSummary run_experiment(const Json& config, const std::filesystem::path& out_dir);

struct Report {
  std::string table;
  Json index;
  bool all_passed = true;
};
Report make_report(const std::vector<RunSummary>& summaries);

/// Cartesian product over the "sweep" object {"dotted.key": [values]}; without one the config itself.
std::vector<Json> expand_sweep(const Json& config);

/// Runs each expanded config in out_dir/<hash> on up to `threads` workers; results ordered by hash.
std::vector<RunSummary> run_sweep(const Json& config, const std::filesystem::path& out_dir, unsigned threads,
                                  const std::filesystem::path& base_dir = ".");

} // namespace kdvlab

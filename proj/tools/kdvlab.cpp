#include "kdvlab/error.hpp"
#include "kdvlab/experiment.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace kdvlab;

namespace {

struct Common {
  std::string config;
  std::string out;
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;
};

Json load_raw(const Common& c) {
  Json raw = read_json(c.config);
  if (c.seed && raw.is_object()) raw["seed"] = *c.seed;
  if (c.threads && raw.is_object()) raw["threads"] = c.threads;
  return raw;
}

fs::path base_dir(const Common& c) {
  const fs::path p = fs::absolute(c.config).parent_path();
  return p.empty() ? fs::path(".") : p;
}

void print_errors(const std::vector<ConfigError>& errors) {
  for (const auto& e : errors) std::cerr << "error: " << (e.path.empty() ? "<root>" : e.path) << ": " << e.message << "\n";
}

void print_summary(const RunSummary& s) {
  for (const auto& c : s.checks)
    std::printf("%-4s %-36s %-14s %s %s\n", c.passed ? "ok" : "FAIL", c.name.c_str(), format_double(c.value).c_str(),
                c.relation.c_str(), format_double(c.threshold).c_str());
  if (!s.error.empty()) std::printf("error %s\n", s.error.c_str());
  std::printf("%s %s %s (%.2f s)\n", s.config_hash.c_str(), s.experiment.c_str(), s.passed() ? "PASS" : "FAIL", s.wall_time);
}

int cmd_validate(const Common& c) {
  const ValidationResult v = validate_config(load_raw(c), base_dir(c));
  if (!v.ok()) {
    print_errors(v.errors);
    return 2;
  }
  Json out = v.config;
  out["config_hash"] = config_hash(v.config);
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_run(const Common& c) {
  const Json raw = load_raw(c);
  if (raw.is_object() && raw.contains("sweep")) {
    std::cerr << "error: sweep: config has a sweep section; use the sweep verb\n";
    return 2;
  }
  const ValidationResult v = validate_config(raw, base_dir(c));
  if (!v.ok()) {
    print_errors(v.errors);
    return 2;
  }
  const fs::path out = c.out.empty() ? fs::path(v.config.at("output_dir").get<std::string>()) : fs::path(c.out);
  const RunSummary s = run_experiment(v.config, out);
  print_summary(s);
  return s.passed() ? 0 : 1;
}

std::vector<RunSummary> collect(const std::vector<std::string>& paths) {
  std::vector<RunSummary> out;
  for (const auto& p : paths) {
    const fs::path path(p);
    if (fs::is_directory(path)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::recursive_directory_iterator(path))
        if (entry.is_regular_file() && entry.path().filename() == "summary.json") found.push_back(entry.path());
      std::sort(found.begin(), found.end());
      for (const auto& f : found) out.push_back(summary_from_json(read_json(f)));
    } else {
      out.push_back(summary_from_json(read_json(path)));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const RunSummary& a, const RunSummary& b) { return a.config_hash < b.config_hash; });
  return out;
}

int emit_report(const std::vector<RunSummary>& summaries, const std::string& out) {
  const Report rep = make_report(summaries);
  std::cout << rep.table;
  if (!out.empty()) {
    write_json(fs::path(out) / "index.json", rep.index);
    write_text(fs::path(out) / "report.txt", rep.table);
  }
  return rep.all_passed ? 0 : 1;
}

int cmd_sweep(const Common& c) {
  const Json raw = load_raw(c);
  unsigned threads = c.threads;
  if (!threads) threads = raw.is_object() && raw.contains("threads") && raw.at("threads").is_number_unsigned() ? raw.at("threads").get<unsigned>() : 1;
  std::string out = c.out;
  if (out.empty()) out = raw.is_object() ? raw.value("output_dir", std::string{"out"}) : "out";
  const auto results = run_sweep(raw, out, threads, base_dir(c));
  for (const auto& s : results) print_summary(s);
  return emit_report(results, out);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"kdvlab: resolvent diagnostics and gKdV experiments"};
  app.require_subcommand(1);
  Common common;
  std::vector<std::string> report_paths;

  auto add_common = [&](CLI::App* sub, bool with_out) {
    sub->add_option("--config", common.config, "Config file (JSON)")->required()->check(CLI::ExistingFile);
    if (with_out) sub->add_option("--out", common.out, "Output directory");
    sub->add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", common.seed, "Random seed (overrides the config)");
  };
  auto* validate = app.add_subcommand("validate", "Check a config and print it with defaults filled");
  add_common(validate, false);
  auto* run = app.add_subcommand("run", "Run one experiment");
  add_common(run, true);
  auto* sweep = app.add_subcommand("sweep", "Run every config of a parameter sweep");
  add_common(sweep, true);
  auto* report = app.add_subcommand("report", "Aggregate summary.json files");
  report->add_option("summaries", report_paths, "summary.json files or directories")->required();
  report->add_option("--out", common.out, "Directory for index.json and report.txt");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*validate) return cmd_validate(common);
    if (*run) return cmd_run(common);
    if (*sweep) return cmd_sweep(common);
    if (*report) return emit_report(collect(report_paths), common.out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

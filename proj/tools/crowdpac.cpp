#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "crowdpac/error.hpp"
#include "crowdpac/harness.hpp"

namespace fs = std::filesystem;
using namespace crowdpac;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

bool all_completed(const std::vector<TrialResult>& results) {
  for (const auto& r : results) {
    if (!r.completed) return false;
  }
  return true;
}

std::vector<std::pair<std::string, std::string>> parse_vary(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw ConfigError("--vary expects key=v1,v2,...");
  const std::string key = spec.substr(0, eq);
  std::vector<std::pair<std::string, std::string>> out;
  std::string rest = spec.substr(eq + 1);
  std::size_t start = 0;
  while (start <= rest.size()) {
    const auto comma = rest.find(',', start);
    const auto v = rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!v.empty()) out.emplace_back(key, v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw ConfigError("--vary lists no values");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crowdsourced PAC learning simulator"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string out;
  std::string summary;
  std::string vary;
  bool timings = false;

  auto* run = app.add_subcommand("run", "Run one experiment and write one JSON line per trial");
  run->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Master seed (overrides experiment.seed)");
  run->add_option("--trials", trials, "Trial count (overrides experiment.trials)");
  run->add_option("--out", out, "Output .jsonl path")->required();
  run->add_option("--summary", summary, "Optional CSV summary path");
  run->add_flag("--timings", timings, "Record wall time per trial (output no longer reproducible)");

  auto* sweep = app.add_subcommand("sweep", "Run one experiment per value of a config key");
  sweep->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--vary", vary, "key=v1,v2,...")->required();
  sweep->add_option("--seed", seed, "Master seed (overrides experiment.seed)");
  sweep->add_option("--trials", trials, "Trial count (overrides experiment.trials)");
  sweep->add_option("--out", out, "Output directory")->required();
  sweep->add_flag("--timings", timings, "Record wall time per trial");

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg = load_config(config);
    if (seed) cfg = with_override(cfg, "experiment.seed", std::to_string(*seed));
    if (trials) cfg = with_override(cfg, "experiment.trials", std::to_string(*trials));

    bool ok = true;
    if (run->parsed()) {
      const auto results = run_experiment(cfg, timings);
      auto file = open_out(out);
      write_header(file, cfg);
      write_trials(file, results);
      if (!summary.empty()) {
        auto csv = open_out(summary);
        write_summary_csv(csv, {{to_string(cfg.algorithm), aggregate_trials(cfg, results)}});
      }
      ok = all_completed(results);
    } else {
      std::vector<std::pair<std::string, SummaryRecord>> rows;
      for (const auto& [key, value] : parse_vary(vary)) {
        const auto point = with_override(cfg, key, value);
        const auto results = run_experiment(point, timings);
        const std::string label = key + "=" + value;
        auto file = open_out(fs::path(out) / (label + ".jsonl"));
        write_header(file, point);
        write_trials(file, results);
        rows.emplace_back(label, aggregate_trials(point, results));
        ok = ok && all_completed(results);
        std::cerr << label << ": " << results.size() << " trials\n";
      }
      auto csv = open_out(fs::path(out) / "summary.csv");
      write_summary_csv(csv, rows);
    }
    if (!ok) std::cerr << "some trials raised errors; see the 'error' field\n";
    return ok ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

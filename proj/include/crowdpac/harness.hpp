#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crowdpac/crowd.hpp"
#include "crowdpac/detection.hpp"
#include "crowdpac/learner.hpp"

namespace crowdpac {

enum class Algorithm { baseline, interleave, robust, detect };

std::string to_string(Algorithm a);

/// Fully resolved experiment description. Every field has a default; a config
/// file only lists overrides.
struct ExperimentConfig {
  Algorithm algorithm = Algorithm::interleave;
  double eps = 0.05;
  double delta = 0.1;
  std::size_t trials = 1;
  std::uint64_t seed = 1;
  std::optional<std::size_t> test_size;  // default ceil(100 / eps)

  HypothesisClass cls = HypothesisClass::thresholds();
  WorldSpec world;  // seed is per trial

  double alpha_assumed = 0.7;        // interleave filter and baseline committees
  std::optional<double> robust_alpha;  // default: the pool's alpha
  FilterParams filter;
  LearnerConstants constants;

  // detect
  std::size_t detect_n = 50;
  std::size_t detect_good = 26;
  double detect_good_spread = 0.05;
  std::vector<Hypothesis> detect_bad;

  /// Flat key = value map this config was built from, defaults included.
  std::map<std::string, std::string> entries;

  void validate() const;
  std::uint64_t hash() const;
  /// m_{eps,delta} at the configured C.
  std::uint64_t m_realizable() const;
  std::size_t effective_test_size() const;
};

/// Parses the `[section]` / `key = value` text format; `#` starts a comment.
/// Keys come back as "section.key".
std::map<std::string, std::string> parse_config_text(const std::string& text);

/// Builds and validates a config from a key map; unknown keys throw ConfigError.
ExperimentConfig make_config(const std::map<std::string, std::string>& entries);
ExperimentConfig load_config(const std::string& path);
/// Returns a copy with one key replaced and everything re-derived.
ExperimentConfig with_override(const ExperimentConfig& cfg, const std::string& key,
                               const std::string& value);

/// `threshold=t`, `interval=a,b`, `empty`, `conjunction=mask`, `negation` (of the
/// target), `flip=a,b` (target flipped on [a,b]).
Hypothesis parse_hypothesis(const std::string& text, const Hypothesis& target, unsigned width);
/// `kind[:arg]@weight` entries separated by ';'. Kinds: perfect, fixed:H,
/// colluder:H, hashnoise:mass, adaptive.
std::vector<WeightedBehavior> parse_behaviors(const std::string& text, const Hypothesis& target,
                                              unsigned width);

/// Fraction of test_size fresh draws (evaluation stream, uncharged) where h and
/// the target disagree.
double estimate_error(const Hypothesis& h, World& world, std::size_t test_size);

struct TrialResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  bool completed = false;
  std::string error;  // set when the trial threw
  double err = 0.0;   // Monte Carlo estimate
  std::optional<double> err_exact;
  std::string hypothesis;
  MetricsRecord metrics;
  double cost_per_example = 0.0;  // Lambda
  std::size_t restarts = 0;
  bool h1_shortcut = false;
  bool no_disagreement = false;
  std::optional<double> wall_seconds;
  // detect
  std::vector<std::size_t> selected;
  bool exact_recovery = false;
};

TrialResult run_trial(const ExperimentConfig& cfg, std::size_t index, bool timings = false);

/// Runs cfg.trials trials on up to `threads` workers (0: CROWDPAC_THREADS, else
/// hardware concurrency); results come back in index order.
std::vector<TrialResult> run_experiment(const ExperimentConfig& cfg, bool timings = false,
                                        unsigned threads = 0);

struct SummaryRecord {
  std::uint64_t config_hash = 0;
  std::size_t trials = 0;
  std::size_t completed = 0;
  double mean_err = 0.0;
  double median_err = 0.0;
  double success_rate = 0.0;  // err <= eps, over all trials
  double mean_cost = 0.0;
  double median_cost = 0.0;
  double mean_queries = 0.0;
  std::uint64_t max_load = 0;
  std::uint64_t total_golden = 0;
  double mean_restarts = 0.0;
  std::optional<double> exact_recovery_rate;
};

/// Throws InvalidArgument on empty input and ConfigError on mixed config hashes
/// or a Lambda that does not match total_queries / m_{eps,delta}.
SummaryRecord aggregate_trials(const ExperimentConfig& cfg, const std::vector<TrialResult>& results);

/// Config as `# key = value` lines plus the hash.
void write_header(std::ostream& out, const ExperimentConfig& cfg);
/// One JSON object per line, stable field order.
void write_trials(std::ostream& out, const std::vector<TrialResult>& results);
void write_summary_csv(std::ostream& out, const std::vector<std::pair<std::string, SummaryRecord>>& rows);

}  // namespace crowdpac

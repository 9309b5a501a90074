#include "crowdpac/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "crowdpac/error.hpp"

namespace crowdpac {

namespace {

const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> table = {
      {"experiment.algorithm", "interleave"},
      {"experiment.eps", "0.05"},
      {"experiment.delta", "0.1"},
      {"experiment.trials", "1"},
      {"experiment.seed", "1"},
      {"experiment.test_size", "auto"},
      {"class.kind", "threshold"},
      {"class.bits", "8"},
      {"world.distribution", "auto"},
      {"world.points", ""},
      {"world.weights", ""},
      {"world.p_one", "0.5"},
      {"world.target", "auto"},
      {"world.pool", "infinite"},
      {"world.alpha", "0.7"},
      {"world.bad", "colluder:negation@1"},
      {"world.labelers", ""},
      {"world.conditioning_budget", "auto"},
      {"world.record_history", "false"},
      {"learner.alpha_assumed", "0.7"},
      {"learner.alpha", "auto"},
      {"constants.C", "1"},
      {"constants.filter_rounds", "7"},
      {"constants.filtered_factor", "4"},
      {"constants.correct_factor", "4"},
      {"constants.reweighted_factor", "4"},
      {"constants.delta_scale", "0.1"},
      {"constants.rejection_cap", "10000"},
      {"constants.disagreement_cap", "100"},
      {"detect.n", "50"},
      {"detect.good", "26"},
      {"detect.good_spread", "0.05"},
      {"detect.bad", "threshold=0.2;threshold=0.8;negation"},
  };
  return table;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError(what + ": expected a number, got '" + s + "'");
  }
  return v;
}

std::uint64_t to_u64(const std::string& s, const std::string& what) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  const int base = s.starts_with("0x") ? 16 : 10;
  const char* begin = base == 16 ? s.data() + 2 : s.data();
  const auto [ptr, ec] = std::from_chars(begin, end, v, base);
  if (ec != std::errc() || ptr != end || begin == end) {
    throw ConfigError(what + ": expected an unsigned integer, got '" + s + "'");
  }
  return v;
}

bool to_bool(const std::string& s, const std::string& what) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError(what + ": expected true or false, got '" + s + "'");
}

std::vector<double> to_doubles(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(to_double(item, what));
  return out;
}

Algorithm parse_algorithm(const std::string& s) {
  if (s == "baseline") return Algorithm::baseline;
  if (s == "interleave") return Algorithm::interleave;
  if (s == "robust") return Algorithm::robust;
  if (s == "detect") return Algorithm::detect;
  throw ConfigError("experiment.algorithm: unknown algorithm '" + s + "'");
}

HypothesisClass parse_class(const std::string& kind, unsigned bits) {
  if (kind == "threshold") return HypothesisClass::thresholds();
  if (kind == "interval") return HypothesisClass::intervals();
  if (kind == "conjunction") return HypothesisClass::conjunctions(bits);
  throw ConfigError("class.kind: unknown class '" + kind + "'");
}

Hypothesis default_target(const HypothesisClass& cls) {
  switch (cls.kind) {
    case HypothesisClass::Kind::threshold:
      return Hypothesis::threshold(0.5);
    case HypothesisClass::Kind::interval:
      return Hypothesis::interval(0.25, 0.75);
    case HypothesisClass::Kind::conjunction:
      return Hypothesis::conjunction(0b11, cls.bits);
  }
  throw ConfigError("unreachable class kind");
}

bool in_class(const HypothesisClass& cls, const Hypothesis& h) {
  switch (cls.kind) {
    case HypothesisClass::Kind::threshold:
      return h.form() == Hypothesis::Form::threshold;
    case HypothesisClass::Kind::interval:
      return h.form() == Hypothesis::Form::interval;
    case HypothesisClass::Kind::conjunction:
      return h.form() == Hypothesis::Form::conjunction && h.space() == cls.space();
  }
  return false;
}

Distribution parse_distribution(const std::map<std::string, std::string>& e,
                                const HypothesisClass& cls) {
  std::string kind = e.at("world.distribution");
  if (kind == "auto") kind = cls.kind == HypothesisClass::Kind::conjunction ? "bits" : "uniform";
  if (kind == "uniform") return UniformUnit{};
  if (kind == "bits") {
    return UniformBits{cls.kind == HypothesisClass::Kind::conjunction ? cls.bits : 8,
                       to_double(e.at("world.p_one"), "world.p_one")};
  }
  if (kind == "points") {
    WeightedPoints wp;
    for (double x : to_doubles(e.at("world.points"), "world.points")) {
      wp.points.push_back(Instance::scalar(x));
    }
    wp.weights = to_doubles(e.at("world.weights"), "world.weights");
    if (wp.weights.empty()) wp.weights.assign(wp.points.size(), 1.0);
    if (wp.weights.size() != wp.points.size()) {
      throw ConfigError("world.weights: need one weight per point");
    }
    return wp;
  }
  throw ConfigError("world.distribution: unknown distribution '" + kind + "'");
}

double perfect_fraction(const PoolSpec& pool) {
  if (const auto* inf = std::get_if<InfinitePool>(&pool.mode)) return inf->alpha;
  const auto& fin = std::get<FinitePool>(pool.mode);
  const auto perfect = std::count_if(fin.labelers.begin(), fin.labelers.end(), [](const auto& b) {
    return std::holds_alternative<Perfect>(b);
  });
  return static_cast<double>(perfect) / static_cast<double>(fin.labelers.size());
}

WorldSpec detection_world(const ExperimentConfig& cfg, std::uint64_t seed) {
  const auto& target = cfg.world.target;
  if (target.form() != Hypothesis::Form::threshold) {
    throw ConfigError("detect: good labelers are generated around a threshold target");
  }
  FinitePool fin;
  const double theta = target.theta();
  for (std::size_t i = 0; i < cfg.detect_good; ++i) {
    const double offset =
        cfg.detect_good == 1 ? 0.0
                             : cfg.detect_good_spread *
                                   (2.0 * static_cast<double>(i) / static_cast<double>(cfg.detect_good - 1) - 1.0);
    fin.labelers.push_back(FixedHypothesis{Hypothesis::threshold(std::clamp(theta + offset, 0.0, 1.0))});
  }
  for (std::size_t i = cfg.detect_good; i < cfg.detect_n; ++i) {
    fin.labelers.push_back(FixedHypothesis{cfg.detect_bad[(i - cfg.detect_good) % cfg.detect_bad.size()]});
  }
  WorldSpec spec = cfg.world;
  spec.pool.mode = std::move(fin);
  spec.seed = seed;
  return spec;
}

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::baseline:
      return "baseline";
    case Algorithm::interleave:
      return "interleave";
    case Algorithm::robust:
      return "robust";
    case Algorithm::detect:
      return "detect";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Parsing

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    out[section.empty() ? key : section + "." + key] = value;
  }
  return out;
}

Hypothesis parse_hypothesis(const std::string& text, const Hypothesis& target, unsigned width) {
  const auto eq = text.find('=');
  const std::string kind = trim(text.substr(0, eq));
  const std::string arg = eq == std::string::npos ? "" : trim(text.substr(eq + 1));
  const auto args = to_doubles(arg, "hypothesis '" + text + "'");
  auto need = [&](std::size_t n) {
    if (args.size() != n) {
      throw ConfigError("hypothesis '" + text + "': expected " + std::to_string(n) + " argument(s)");
    }
  };
  try {
    if (kind == "negation") {
      need(0);
      return Hypothesis::negation(target);
    }
    if (kind == "empty") {
      need(0);
      return Hypothesis::empty_interval();
    }
    if (kind == "threshold") {
      need(1);
      return Hypothesis::threshold(args[0]);
    }
    if (kind == "interval") {
      need(2);
      return Hypothesis::interval(args[0], args[1]);
    }
    if (kind == "flip") {
      need(2);
      return Hypothesis::flip(target, Hypothesis::interval(args[0], args[1]));
    }
    if (kind == "conjunction") {
      return Hypothesis::conjunction(to_u64(arg, "conjunction mask"), width);
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError("hypothesis '" + text + "': " + e.what());
  }
  throw ConfigError("unknown hypothesis '" + text + "'");
}

std::vector<WeightedBehavior> parse_behaviors(const std::string& text, const Hypothesis& target,
                                              unsigned width) {
  std::vector<WeightedBehavior> out;
  int group = 0;
  for (const auto& entry : split(text, ';')) {
    std::string body = entry;
    double weight = 1.0;
    if (const auto at = entry.rfind('@'); at != std::string::npos) {
      body = trim(entry.substr(0, at));
      weight = to_double(trim(entry.substr(at + 1)), "weight in '" + entry + "'");
      if (!(weight > 0.0)) throw ConfigError("weight in '" + entry + "' must be positive");
    }
    const auto colon = body.find(':');
    const std::string kind = trim(body.substr(0, colon));
    const std::string arg = colon == std::string::npos ? "" : trim(body.substr(colon + 1));
    LabelerBehavior b;
    if (kind == "perfect") {
      b = Perfect{};
    } else if (kind == "fixed") {
      b = FixedHypothesis{parse_hypothesis(arg, target, width)};
    } else if (kind == "colluder") {
      b = Colluder{group++, parse_hypothesis(arg, target, width)};
    } else if (kind == "hashnoise") {
      b = HashNoise{to_double(arg, "hashnoise mass"), static_cast<std::uint64_t>(out.size())};
    } else if (kind == "adaptive") {
      b = AdaptiveAdversary{};
    } else {
      throw ConfigError("unknown labeler kind '" + kind + "'");
    }
    out.push_back({std::move(b), weight});
  }
  return out;
}

ExperimentConfig make_config(const std::map<std::string, std::string>& entries) {
  std::map<std::string, std::string> e = defaults();
  for (const auto& [k, v] : entries) {
    if (!e.contains(k)) throw ConfigError("unknown config key '" + k + "'");
    e[k] = v;
  }

  ExperimentConfig cfg;
  cfg.entries = e;
  cfg.algorithm = parse_algorithm(e.at("experiment.algorithm"));
  cfg.eps = to_double(e.at("experiment.eps"), "experiment.eps");
  cfg.delta = to_double(e.at("experiment.delta"), "experiment.delta");
  cfg.trials = to_u64(e.at("experiment.trials"), "experiment.trials");
  cfg.seed = to_u64(e.at("experiment.seed"), "experiment.seed");
  if (e.at("experiment.test_size") != "auto") {
    cfg.test_size = to_u64(e.at("experiment.test_size"), "experiment.test_size");
  }

  const auto bits = static_cast<unsigned>(to_u64(e.at("class.bits"), "class.bits"));
  try {
    cfg.cls = parse_class(e.at("class.kind"), bits);
  } catch (const InvalidArgument& ex) {
    throw ConfigError(std::string("class: ") + ex.what());
  }
  const unsigned width = cfg.cls.kind == HypothesisClass::Kind::conjunction ? bits : 0;

  cfg.world.distribution = parse_distribution(e, cfg.cls);
  cfg.world.target = e.at("world.target") == "auto"
                         ? default_target(cfg.cls)
                         : parse_hypothesis(e.at("world.target"), default_target(cfg.cls), width);
  if (!in_class(cfg.cls, cfg.world.target)) {
    throw ConfigError("world.target " + cfg.world.target.describe() + " is not in class " + cfg.cls.name());
  }

  const std::string pool = e.at("world.pool");
  if (pool == "infinite") {
    InfinitePool inf;
    inf.alpha = to_double(e.at("world.alpha"), "world.alpha");
    inf.bad_mix = parse_behaviors(e.at("world.bad"), cfg.world.target, width);
    cfg.world.pool.mode = std::move(inf);
  } else if (pool == "finite") {
    FinitePool fin;
    for (auto& wb : parse_behaviors(e.at("world.labelers"), cfg.world.target, width)) {
      const auto copies = static_cast<std::size_t>(wb.weight);
      if (static_cast<double>(copies) != wb.weight) {
        throw ConfigError("world.labelers: '@n' is a whole copy count in a finite pool");
      }
      fin.labelers.insert(fin.labelers.end(), copies, wb.behavior);
    }
    cfg.world.pool.mode = std::move(fin);
  } else {
    throw ConfigError("world.pool: expected infinite or finite, got '" + pool + "'");
  }
  if (e.at("world.conditioning_budget") != "auto") {
    cfg.world.pool.conditioning_budget =
        to_u64(e.at("world.conditioning_budget"), "world.conditioning_budget");
  }
  cfg.world.pool.rejection_cap = to_u64(e.at("constants.rejection_cap"), "constants.rejection_cap");
  cfg.world.pool.record_history = to_bool(e.at("world.record_history"), "world.record_history");

  cfg.alpha_assumed = to_double(e.at("learner.alpha_assumed"), "learner.alpha_assumed");
  if (e.at("learner.alpha") != "auto") {
    cfg.robust_alpha = to_double(e.at("learner.alpha"), "learner.alpha");
  }
  cfg.filter.round_constant = to_double(e.at("constants.filter_rounds"), "constants.filter_rounds");
  cfg.filter.alpha_assumed = cfg.alpha_assumed;
  cfg.constants.sample_constant = to_double(e.at("constants.C"), "constants.C");
  cfg.constants.filtered_factor = to_double(e.at("constants.filtered_factor"), "constants.filtered_factor");
  cfg.constants.correct_factor = to_double(e.at("constants.correct_factor"), "constants.correct_factor");
  cfg.constants.reweighted_factor =
      to_double(e.at("constants.reweighted_factor"), "constants.reweighted_factor");
  cfg.constants.delta_scale = to_double(e.at("constants.delta_scale"), "constants.delta_scale");
  cfg.constants.disagreement_cap =
      to_double(e.at("constants.disagreement_cap"), "constants.disagreement_cap");

  cfg.detect_n = to_u64(e.at("detect.n"), "detect.n");
  cfg.detect_good = to_u64(e.at("detect.good"), "detect.good");
  cfg.detect_good_spread = to_double(e.at("detect.good_spread"), "detect.good_spread");
  for (const auto& h : split(e.at("detect.bad"), ';')) {
    cfg.detect_bad.push_back(parse_hypothesis(h, cfg.world.target, width));
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return make_config(parse_config_text(text.str()));
}

ExperimentConfig with_override(const ExperimentConfig& cfg, const std::string& key,
                               const std::string& value) {
  auto entries = cfg.entries;
  if (!entries.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  entries[key] = value;
  return make_config(entries);
}

void ExperimentConfig::validate() const {
  auto fraction = [](double v, const char* what) {
    if (!(v > 0.0 && v < 1.0)) throw ConfigError(std::string(what) + " must lie in (0,1)");
  };
  fraction(eps, "experiment.eps");
  fraction(delta, "experiment.delta");
  if (trials < 1) throw ConfigError("experiment.trials must be at least 1");
  if (test_size && *test_size < 1) throw ConfigError("experiment.test_size must be at least 1");
  try {
    filter.validate();
    constants.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (const auto* inf = std::get_if<InfinitePool>(&world.pool.mode)) {
    if (!(inf->alpha > 0.0 && inf->alpha <= 1.0)) throw ConfigError("world.alpha must lie in (0,1]");
    if (inf->alpha < 1.0 && inf->bad_mix.empty()) {
      throw ConfigError("world.bad is empty but world.alpha < 1");
    }
  } else if (std::get<FinitePool>(world.pool.mode).labelers.empty() && algorithm != Algorithm::detect) {
    throw ConfigError("world.labelers is empty");
  }
  if (robust_alpha && !(*robust_alpha > 0.0 && *robust_alpha <= 1.0)) {
    throw ConfigError("learner.alpha must lie in (0,1]");
  }
  if (algorithm == Algorithm::detect) {
    if (detect_good > detect_n) throw ConfigError("detect.good exceeds detect.n");
    if (detect_good < detect_n && detect_bad.empty()) throw ConfigError("detect.bad is empty");
    if (!(detect_good_spread >= 0.0)) throw ConfigError("detect.good_spread must be non-negative");
  }
  // Catches distribution/target space mismatches before any trial runs.
  World probe(WorldSpec{world.distribution, world.target, world.pool, seed});
}

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (const auto& [k, v] : entries) {
    for (const char c : k + " = " + v + "\n") {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::uint64_t ExperimentConfig::m_realizable() const {
  return sample_complexity(cls, eps, delta, constants.sample_constant);
}

std::size_t ExperimentConfig::effective_test_size() const {
  return test_size ? *test_size : static_cast<std::size_t>(std::ceil(100.0 / eps));
}

// ---------------------------------------------------------------------------
// Trials

double estimate_error(const Hypothesis& h, World& world, std::size_t test_size) {
  if (test_size < 1) throw InvalidArgument("test_size must be at least 1");
  std::size_t wrong = 0;
  for (std::size_t k = 0; k < test_size; ++k) {
    const Instance x = world.sample(world.evaluation_rng());
    if (evaluate(h, x) != evaluate(world.target(), x)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(test_size);
}

TrialResult run_trial(const ExperimentConfig& cfg, std::size_t index, bool timings) {
  TrialResult r;
  r.index = index;
  r.seed = derive_seed(cfg.seed, index);
  r.config_hash = cfg.hash();
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t m = cfg.m_realizable();
  r.metrics.m_realizable = m;
  try {
    if (cfg.algorithm == Algorithm::detect) {
      DetectionWorld dw(detection_world(cfg, r.seed), cfg.eps, cfg.delta);
      const auto report = detect_good_labelers(dw);
      r.selected = report.selected;
      r.exact_recovery = report.selected == dw.good_set();
      r.metrics = ledger_report(dw.world().pool(), m);
    } else {
      WorldSpec spec = cfg.world;
      spec.seed = r.seed;
      World world(spec);
      RunReport report;
      switch (cfg.algorithm) {
        case Algorithm::baseline:
          report = baseline(world, cfg.cls, cfg.eps, cfg.delta, cfg.alpha_assumed, cfg.constants);
          break;
        case Algorithm::interleave:
          report = interleave_learn(world, cfg.cls, cfg.eps, cfg.delta, cfg.filter, cfg.constants);
          break;
        case Algorithm::robust:
          report = robust_learn(world, cfg.cls, cfg.eps, cfg.delta,
                                cfg.robust_alpha.value_or(perfect_fraction(cfg.world.pool)),
                                cfg.filter, cfg.constants);
          break;
        case Algorithm::detect:
          break;
      }
      r.metrics = report.metrics;
      r.restarts = report.restarts;
      r.h1_shortcut = report.h1_shortcut;
      r.no_disagreement = report.no_disagreement;
      r.hypothesis = report.hypothesis.describe();
      r.err = estimate_error(report.hypothesis, world, cfg.effective_test_size());
      r.err_exact = exact_disagreement(world.distribution(), report.hypothesis, world.target());
    }
    r.completed = true;
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.cost_per_example = static_cast<double>(r.metrics.total_queries) / static_cast<double>(m);
  if (timings) {
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return r;
}

std::vector<TrialResult> run_experiment(const ExperimentConfig& cfg, bool timings, unsigned threads) {
  cfg.validate();
  if (threads == 0) {
    if (const char* env = std::getenv("CROWDPAC_THREADS")) {
      threads = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
    }
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  }
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, cfg.trials));

  std::vector<TrialResult> results(cfg.trials);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cfg.trials; i = next++) results[i] = run_trial(cfg, i, timings);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return results;
}

SummaryRecord aggregate_trials(const ExperimentConfig& cfg, const std::vector<TrialResult>& results) {
  if (results.empty()) throw InvalidArgument("cannot aggregate zero trials");
  const std::uint64_t hash = cfg.hash();
  const std::uint64_t m = cfg.m_realizable();
  SummaryRecord s;
  s.config_hash = hash;
  s.trials = results.size();
  std::vector<double> errs;
  std::vector<double> costs;
  std::size_t successes = 0;
  std::size_t recoveries = 0;
  double queries = 0.0;
  double restarts = 0.0;
  for (const auto& r : results) {
    if (r.config_hash != hash) throw ConfigError("trial records come from different configs");
    const double expected = static_cast<double>(r.metrics.total_queries) / static_cast<double>(m);
    if (r.metrics.m_realizable != m || r.cost_per_example != expected) {
      throw ConfigError("trial " + std::to_string(r.index) + ": Lambda does not match the ledger");
    }
    if (!r.completed) continue;
    ++s.completed;
    errs.push_back(r.err);
    costs.push_back(r.cost_per_example);
    if (cfg.algorithm == Algorithm::detect ? r.exact_recovery : r.err <= cfg.eps) ++successes;
    if (r.exact_recovery) ++recoveries;
    queries += static_cast<double>(r.metrics.total_queries);
    restarts += static_cast<double>(r.restarts);
    s.max_load = std::max(s.max_load, r.metrics.load);
    s.total_golden += r.metrics.golden_queries;
  }
  auto mean = [](const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
  };
  auto median = [](std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
  };
  const double done = s.completed == 0 ? 1.0 : static_cast<double>(s.completed);
  s.mean_err = mean(errs);
  s.median_err = median(errs);
  s.mean_cost = mean(costs);
  s.median_cost = median(costs);
  s.mean_queries = queries / done;
  s.mean_restarts = restarts / done;
  s.success_rate = static_cast<double>(successes) / static_cast<double>(s.trials);
  if (cfg.algorithm == Algorithm::detect) {
    s.exact_recovery_rate = static_cast<double>(recoveries) / static_cast<double>(s.trials);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string hex(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

}  // namespace

void write_header(std::ostream& out, const ExperimentConfig& cfg) {
  for (const auto& [k, v] : cfg.entries) out << "# " << k << " = " << v << "\n";
  out << "# config_hash = " << hex(cfg.hash()) << "\n";
}

void write_trials(std::ostream& out, const std::vector<TrialResult>& results) {
  for (const auto& r : results) {
    nlohmann::ordered_json j;
    j["trial"] = r.index;
    j["seed"] = r.seed;
    j["config_hash"] = hex(r.config_hash);
    j["completed"] = r.completed;
    j["error"] = r.completed ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.error);
    j["err"] = r.err;
    j["err_exact"] = r.err_exact ? nlohmann::ordered_json(*r.err_exact) : nlohmann::ordered_json(nullptr);
    j["total_queries"] = r.metrics.total_queries;
    j["m"] = r.metrics.m_realizable;
    j["cost"] = r.cost_per_example;
    j["load"] = r.metrics.load;
    j["golden"] = r.metrics.golden_queries;
    j["labelers"] = r.metrics.distinct_labelers;
    j["restarts"] = r.restarts;
    j["h1_shortcut"] = r.h1_shortcut;
    j["no_disagreement"] = r.no_disagreement;
    j["hypothesis"] = r.hypothesis;
    j["selected"] = r.selected;
    j["exact_recovery"] = r.exact_recovery;
    if (r.wall_seconds) j["wall_seconds"] = *r.wall_seconds;
    out << j.dump() << "\n";
  }
}

void write_summary_csv(std::ostream& out,
                       const std::vector<std::pair<std::string, SummaryRecord>>& rows) {
  out << "label,config_hash,trials,completed,mean_err,median_err,success_rate,mean_cost,"
         "median_cost,mean_queries,max_load,total_golden,mean_restarts,exact_recovery_rate\n";
  const auto old = out.precision(10);
  for (const auto& [label, s] : rows) {
    out << label << "," << hex(s.config_hash) << "," << s.trials << "," << s.completed << ","
        << s.mean_err << "," << s.median_err << "," << s.success_rate << "," << s.mean_cost << ","
        << s.median_cost << "," << s.mean_queries << "," << s.max_load << "," << s.total_golden
        << "," << s.mean_restarts << ",";
    if (s.exact_recovery_rate) out << *s.exact_recovery_rate;
    out << "\n";
  }
  out.precision(old);
}

}  // namespace crowdpac

#include <doctest.h>

#include <sstream>

#include "crowdpac/error.hpp"
#include "crowdpac/harness.hpp"

using namespace crowdpac;

namespace {

ExperimentConfig config(const std::string& text) { return make_config(parse_config_text(text)); }

std::string render(const ExperimentConfig& cfg, const std::vector<TrialResult>& results) {
  std::ostringstream out;
  write_header(out, cfg);
  write_trials(out, results);
  return out.str();
}

TrialResult fake(const ExperimentConfig& cfg, std::size_t index, double err) {
  TrialResult r;
  r.index = index;
  r.config_hash = cfg.hash();
  r.completed = true;
  r.err = err;
  r.metrics.m_realizable = cfg.m_realizable();
  r.metrics.total_queries = 1000 * (index + 1);
  r.metrics.load = index + 1;
  r.metrics.golden_queries = index;
  r.cost_per_example = static_cast<double>(r.metrics.total_queries) / static_cast<double>(cfg.m_realizable());
  return r;
}

}  // namespace

TEST_CASE("config text format") {
  const auto e = parse_config_text(
      "# comment\n"
      "[experiment]\n"
      "eps = 0.1   # trailing\n"
      "algorithm=baseline\n"
      "\n"
      "[world]\n"
      "bad = colluder:negation@2; fixed:threshold=0.3@1\n");
  CHECK(e.at("experiment.eps") == "0.1");
  CHECK(e.at("experiment.algorithm") == "baseline");
  CHECK(e.at("world.bad") == "colluder:negation@2; fixed:threshold=0.3@1");
  CHECK_THROWS_AS(parse_config_text("[experiment\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("eps 0.1\n"), ConfigError);
}

TEST_CASE("config defaults and validation") {
  const auto cfg = config("");
  CHECK(cfg.algorithm == Algorithm::interleave);
  CHECK(cfg.eps == 0.05);
  CHECK(cfg.m_realizable() == 126);
  CHECK(cfg.effective_test_size() == 2000);
  CHECK(cfg.filter.round_constant == 7.0);
  CHECK(cfg.constants.delta_scale == 0.1);

  CHECK_THROWS_AS(config("[experiment]\nepsilon = 0.1\n"), ConfigError);
  CHECK_THROWS_AS(config("[experiment]\neps = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(config("[experiment]\neps = abc\n"), ConfigError);
  CHECK_THROWS_AS(config("[experiment]\ntrials = 0\n"), ConfigError);
  CHECK_THROWS_AS(config("[experiment]\nalgorithm = magic\n"), ConfigError);
  CHECK_THROWS_AS(config("[world]\ntarget = interval=0.2,0.4\n"), ConfigError);
  CHECK_THROWS_AS(config("[world]\nalpha = 0.5\nbad =\n"), ConfigError);
  CHECK_THROWS_AS(config("[world]\nbad = gremlin\n"), ConfigError);
  CHECK_THROWS_AS(config("[world]\ndistribution = bits\n"), InstanceSpaceMismatch);
}

TEST_CASE("hypothesis and behavior grammar") {
  const auto t = Hypothesis::threshold(0.5);
  CHECK(parse_hypothesis("threshold=0.3", t, 0).theta() == 0.3);
  CHECK(parse_hypothesis("interval=0.1,0.2", t, 0).bounds() == std::pair{0.1, 0.2});
  CHECK(parse_hypothesis("negation", t, 0).form() == Hypothesis::Form::negation);
  CHECK(parse_hypothesis("flip=0.1,0.2", t, 0).form() == Hypothesis::Form::flip);
  CHECK(parse_hypothesis("conjunction=5", Hypothesis::conjunction(1, 4), 4).mask() == 5);
  CHECK_THROWS_AS(parse_hypothesis("interval=0.1", t, 0), ConfigError);
  CHECK_THROWS_AS(parse_hypothesis("threshold=abc", t, 0), ConfigError);

  const auto mix = parse_behaviors("perfect@0.5; colluder:negation@2; hashnoise:0.1; adaptive", t, 0);
  REQUIRE(mix.size() == 4);
  CHECK(std::holds_alternative<Perfect>(mix[0].behavior));
  CHECK(mix[1].weight == 2.0);
  CHECK(std::get<HashNoise>(mix[2].behavior).flip_mass == 0.1);
  CHECK(std::holds_alternative<AdaptiveAdversary>(mix[3].behavior));
  CHECK_THROWS_AS(parse_behaviors("perfect@-1", t, 0), ConfigError);
}

TEST_CASE("finite pools and other classes build") {
  const auto fin = config("[world]\npool = finite\nlabelers = perfect@3; fixed:threshold=0.2@2\n");
  CHECK(std::get<FinitePool>(fin.world.pool.mode).labelers.size() == 5);
  CHECK_THROWS_AS(config("[world]\npool = finite\nlabelers = perfect@1.5\n"), ConfigError);

  const auto conj = config("[class]\nkind = conjunction\nbits = 6\n");
  CHECK(std::holds_alternative<UniformBits>(conj.world.distribution));
  CHECK(conj.world.target.mask() == 0b11);

  const auto pts = config("[world]\ndistribution = points\npoints = 0.1, 0.9\nweights = 1, 3\n");
  CHECK(std::get<WeightedPoints>(pts.world.distribution).weights == std::vector<double>{1, 3});
}

TEST_CASE("config hash") {
  const auto a = config("[experiment]\neps = 0.1\n");
  const auto b = config("[experiment]\neps = 0.1\n");
  const auto c = config("[experiment]\neps = 0.2\n");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  CHECK(with_override(a, "experiment.eps", "0.2").hash() == c.hash());
  CHECK_THROWS_AS(with_override(a, "nope", "1"), ConfigError);
}

TEST_CASE("estimate_error") {
  WorldSpec spec;
  spec.pool.mode = InfinitePool{1.0, {}};
  World w(spec);
  CHECK(estimate_error(spec.target, w, 1000) == 0.0);
  CHECK(estimate_error(Hypothesis::negation(spec.target), w, 1000) == 1.0);
  CHECK(std::abs(estimate_error(Hypothesis::threshold(0.6), w, 100000) - 0.1) < 0.005);
  CHECK(w.pool().ledger().total_queries() == 0);
  CHECK_THROWS_AS(estimate_error(spec.target, w, 0), InvalidArgument);
}

TEST_CASE("noiseless interleave trial") {
  const auto cfg = config("[world]\nalpha = 1\n");
  const auto results = run_experiment(cfg, false, 1);
  REQUIRE(results.size() == 1);
  const auto& r = results[0];
  CHECK(r.completed);
  CHECK(r.err <= cfg.eps);
  REQUIRE(r.err_exact);
  CHECK(*r.err_exact <= cfg.eps);
  CHECK(r.metrics.golden_queries == 0);
  CHECK(r.metrics.load == 1);
  CHECK(r.seed == derive_seed(cfg.seed, 0));
}

TEST_CASE("output is reproducible and independent of thread count") {
  const auto cfg = config("[experiment]\ntrials = 4\nseed = 77\n");
  const auto one = render(cfg, run_experiment(cfg, false, 1));
  const auto again = render(cfg, run_experiment(cfg, false, 1));
  const auto three = render(cfg, run_experiment(cfg, false, 3));
  CHECK(one == again);
  CHECK(one == three);
  CHECK(one.find("wall_seconds") == std::string::npos);
  CHECK(one.find("# config_hash = ") != std::string::npos);
}

TEST_CASE("trial errors are captured") {
  // Adversarial noise breaks the oracle; the batch still completes.
  const auto cfg = config(
      "[experiment]\ntrials = 2\n[world]\nalpha = 0.01\nbad = hashnoise:0.5\n"
      "[learner]\nalpha_assumed = 0.99\n");
  const auto results = run_experiment(cfg, false, 1);
  REQUIRE(results.size() == 2);
  for (const auto& r : results) {
    CHECK_FALSE(r.completed);
    CHECK(r.error.find("phase") != std::string::npos);
  }
  const auto s = aggregate_trials(cfg, results);
  CHECK(s.completed == 0);
  CHECK(s.success_rate == 0.0);
}

TEST_CASE("aggregate_trials") {
  const auto cfg = config("[experiment]\neps = 0.1\n");
  CHECK_THROWS_AS(aggregate_trials(cfg, {}), InvalidArgument);

  const auto single = fake(cfg, 0, 0.03);
  const auto s1 = aggregate_trials(cfg, {single});
  CHECK(s1.mean_err == 0.03);
  CHECK(s1.median_err == 0.03);
  CHECK(s1.mean_cost == single.cost_per_example);
  CHECK(s1.max_load == 1);
  CHECK(s1.success_rate == 1.0);

  const auto s2 = aggregate_trials(cfg, {fake(cfg, 0, 0.0), fake(cfg, 1, 0.2)});
  CHECK(s2.success_rate == 0.5);
  CHECK(s2.mean_err == doctest::Approx(0.1));
  CHECK(s2.max_load == 2);
  CHECK(s2.total_golden == 1);

  auto foreign = fake(cfg, 1, 0.0);
  foreign.config_hash ^= 1;
  CHECK_THROWS_AS(aggregate_trials(cfg, {fake(cfg, 0, 0.0), foreign}), ConfigError);

  auto drifted = fake(cfg, 0, 0.0);
  drifted.cost_per_example += 1.0;
  CHECK_THROWS_AS(aggregate_trials(cfg, {drifted}), ConfigError);

  const auto detect = config("[experiment]\nalgorithm = detect\n");
  std::vector<TrialResult> runs;
  for (std::size_t i = 0; i < 50; ++i) {
    auto r = fake(detect, i, 0.0);
    r.exact_recovery = i < 46;
    runs.push_back(r);
  }
  const auto s3 = aggregate_trials(detect, runs);
  REQUIRE(s3.exact_recovery_rate);
  CHECK(*s3.exact_recovery_rate == doctest::Approx(0.92));
}

TEST_CASE("detect trials through the harness") {
  const auto cfg = config("[experiment]\nalgorithm = detect\ntrials = 2\n[detect]\nn = 9\ngood = 5\n");
  const auto results = run_experiment(cfg, false, 1);
  for (const auto& r : results) {
    CHECK(r.completed);
    CHECK(r.exact_recovery);
    CHECK(r.selected == std::vector<std::size_t>{0, 1, 2, 3, 4});
  }
  std::ostringstream csv;
  write_summary_csv(csv, {{"detect", aggregate_trials(cfg, results)}});
  CHECK(csv.str().find("detect,") != std::string::npos);
}

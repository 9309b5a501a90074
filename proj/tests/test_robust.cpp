#include <doctest.h>

#include "crowdpac/error.hpp"
#include "crowdpac/learner.hpp"

using namespace crowdpac;

namespace {

const Hypothesis f_star = Hypothesis::threshold(0.5);

WorldSpec single_block(double alpha, std::uint64_t seed) {
  WorldSpec spec;
  spec.target = f_star;
  spec.pool.mode = InfinitePool{alpha, {{Colluder{0, Hypothesis::negation(f_star)}, 1.0}}};
  spec.seed = seed;
  return spec;
}

// Bad mass split into six labelers, each wrong on its own sixth of [0,1].
WorldSpec six_blocks(std::uint64_t seed) {
  WorldSpec spec;
  spec.target = f_star;
  InfinitePool pool{0.4, {}};
  for (int j = 0; j < 6; ++j) {
    const auto region = Hypothesis::interval(j / 6.0, (j + 1) / 6.0);
    pool.bad_mix.push_back({FixedHypothesis{Hypothesis::flip(f_star, region)}, 1.0});
  }
  spec.pool.mode = std::move(pool);
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("restart envelope") {
  CHECK(restart_envelope(0.4) == 37);
  CHECK(restart_envelope(1.0) == 0);
}

TEST_CASE("prune_and_label") {
  SUBCASE("perfect crowd never prunes") {
    World w(single_block(1.0, 1));
    const auto xs = w.draw_instances(20);
    const auto out = prune_and_label(w, xs, 0.1, 1.0);
    REQUIRE(std::holds_alternative<Labeled>(out));
    for (const auto& ex : std::get<Labeled>(out).sample) CHECK(ex.y == f_star(ex.x));
    CHECK(w.pool().ledger().golden_queries() == 0);
  }
  SUBCASE("one golden query removes a colluder block") {
    World w(single_block(0.4, 2));
    const auto xs = w.draw_instances(20);
    const auto out = prune_and_label(w, xs, 0.1, 0.4);
    REQUIRE(std::holds_alternative<Pruned>(out));
    const auto& p = std::get<Pruned>(out);
    CHECK(p.new_alpha == doctest::Approx(0.4 / (1.0 - 0.05)));
    CHECK(p.new_alpha > 0.4);
    CHECK(p.test_pair.y == f_star(p.test_pair.x));
    CHECK(w.pool().ledger().golden_queries() == 1);
    REQUIRE(w.pool().conditioning().size() == 1);

    // Conditioned draws are now always perfect.
    auto& pool = w.pool();
    for (int k = 0; k < 2000; ++k) CHECK(pool.is_perfect(pool.draw_active()));

    const auto again = prune_and_label(w, xs, 0.1, p.new_alpha);
    REQUIRE(std::holds_alternative<Labeled>(again));
    for (const auto& ex : std::get<Labeled>(again).sample) CHECK(ex.y == f_star(ex.x));
  }
  SUBCASE("exhausted conditioning budget is a typed error") {
    WorldSpec spec = single_block(0.4, 3);
    spec.pool.conditioning_budget = 0;
    World w(spec);
    const auto xs = w.draw_instances(5);
    CHECK_THROWS_AS(prune_and_label(w, xs, 0.1, 0.4), ConditioningBudgetExceeded);
  }
}

TEST_CASE("robust_learn delegates above three quarters") {
  World w(single_block(0.8, 4));
  const auto r = robust_learn(w, HypothesisClass::thresholds(), 0.05, 0.1, 0.8);
  CHECK(r.metrics.golden_queries == 0);
  CHECK(r.restarts == 0);
  CHECK(r.metrics.load == 1);
  CHECK(r.alpha_trace == std::vector<double>{0.8});
}

TEST_CASE("robust_learn with a single colluder block") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    World w(single_block(0.4, seed));
    const auto r = robust_learn(w, HypothesisClass::thresholds(), 0.05, 0.1, 0.4);
    CHECK(r.metrics.golden_queries == 1);
    CHECK(r.restarts == r.metrics.golden_queries);
    CHECK(uniform_disagreement(r.hypothesis, f_star) <= 0.05);
    CHECK(r.metrics.load <= 1 + w.pool().conditioning().size());
  }
}

TEST_CASE("robust_learn with six disjoint blocks") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    World w(six_blocks(seed));
    const auto r = robust_learn(w, HypothesisClass::thresholds(), 0.05, 0.1, 0.4);
    CHECK(r.metrics.golden_queries <= 37);
    CHECK(r.restarts == r.metrics.golden_queries);
    CHECK(r.metrics.load <= 1 + w.pool().conditioning().size());
    for (std::size_t k = 1; k < r.alpha_trace.size(); ++k) CHECK(r.alpha_trace[k] > r.alpha_trace[k - 1]);
    // Perfect labelers always match golden answers, so none is ever pruned.
    for (const auto& [x, y] : w.pool().conditioning()) CHECK(y == f_star(x));
  }
}

#include <doctest.h>

#include <cmath>

#include "crowdpac/error.hpp"
#include "crowdpac/hypothesis.hpp"
#include "crowdpac/random.hpp"

using namespace crowdpac;

namespace {

Instance at(double x) { return Instance::scalar(x); }
constexpr Label pos = Label::positive;
constexpr Label neg = Label::negative;

// Independent evaluation of the m formula in long double, no shared code.
std::uint64_t m_oracle(long double d, long double eps, long double delta, long double C) {
  const long double raw = (C / eps) * (d * std::log(std::exp(1.0L) / eps) + std::log(1.0L / delta));
  return static_cast<std::uint64_t>(std::ceil(raw));
}

LabeledSample label_with(const Hypothesis& f, const std::vector<Instance>& xs) {
  LabeledSample s;
  for (const auto& x : xs) s.push_back({x, f(x)});
  return s;
}

}  // namespace

TEST_CASE("label negation is an involution") {
  CHECK(-pos == neg);
  CHECK(-neg == pos);
  CHECK(-(-pos) == pos);
  CHECK(to_int(neg) == -1);
}

TEST_CASE("instances validate their space") {
  CHECK_THROWS_AS(Instance::scalar(-0.01), InvalidArgument);
  CHECK_THROWS_AS(Instance::scalar(1.01), InvalidArgument);
  CHECK_THROWS_AS(Instance::bits(0b100, 2), InvalidArgument);
  CHECK_THROWS_AS(Instance::bits(0, 0), InvalidArgument);
  CHECK(at(0.3) == at(0.3));
  CHECK(at(0.3).identity() == at(0.3).identity());
  CHECK(at(0.3).identity() != at(0.30000001).identity());
}

TEST_CASE("threshold evaluation uses x >= theta") {
  const auto h = Hypothesis::threshold(0.5);
  CHECK(evaluate(h, at(0.7)) == pos);
  CHECK(evaluate(h, at(0.5)) == pos);
  CHECK(evaluate(h, at(0.4999)) == neg);
}

TEST_CASE("interval and conjunction evaluation") {
  const auto i = Hypothesis::interval(0.2, 0.4);
  CHECK(evaluate(i, at(0.2)) == pos);
  CHECK(evaluate(i, at(0.4)) == pos);
  CHECK(evaluate(i, at(0.41)) == neg);
  CHECK(evaluate(Hypothesis::empty_interval(), at(0.3)) == neg);

  const auto c = Hypothesis::conjunction(0b101, 4);
  CHECK(evaluate(c, Instance::bits(0b1101, 4)) == pos);
  CHECK(evaluate(c, Instance::bits(0b1001, 4)) == neg);
  CHECK(evaluate(Hypothesis::conjunction(0, 4), Instance::bits(0, 4)) == pos);
}

TEST_CASE("evaluation rejects foreign instances") {
  CHECK_THROWS_AS(evaluate(Hypothesis::threshold(0.5), Instance::bits(1, 3)), InstanceSpaceMismatch);
  CHECK_THROWS_AS(evaluate(Hypothesis::conjunction(1, 3), at(0.5)), InstanceSpaceMismatch);
  CHECK_THROWS_AS(evaluate(Hypothesis::conjunction(1, 3), Instance::bits(1, 4)), InstanceSpaceMismatch);
  CHECK_THROWS_AS(combine_majority3(Hypothesis::threshold(0.5), Hypothesis::threshold(0.5),
                                    Hypothesis::conjunction(1, 3)),
                  InstanceSpaceMismatch);
}

TEST_CASE("majority composite") {
  const auto yes = Hypothesis::threshold(0.0);
  const auto no = Hypothesis::empty_interval();
  CHECK(evaluate(combine_majority3(yes, yes, no), at(0.5)) == pos);
  CHECK(evaluate(combine_majority3(no, yes, no), at(0.5)) == neg);

  SUBCASE("h1 = h2 decides regardless of h3") {
    const auto h1 = Hypothesis::threshold(0.3);
    const auto m = combine_majority3(h1, h1, Hypothesis::negation(h1));
    for (double x = 0.0; x <= 1.0; x += 0.01) CHECK(m(at(x)) == h1(at(x)));
  }

  SUBCASE("pointwise majority property") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
      const auto a = Hypothesis::threshold(rng.uniform());
      const auto b = Hypothesis::interval(0.3 * rng.uniform(), 0.3 + 0.7 * rng.uniform());
      const auto c = Hypothesis::flip(Hypothesis::threshold(rng.uniform()),
                                      Hypothesis::interval(0.1, 0.1 + 0.5 * rng.uniform()));
      const auto m = combine_majority3(a, b, c);
      const Instance x = at(rng.uniform());
      const int votes = to_int(a(x)) + to_int(b(x)) + to_int(c(x));
      CHECK(m(x) == (votes > 0 ? pos : neg));
    }
  }
}

TEST_CASE("negation and flip composites") {
  const auto f = Hypothesis::threshold(0.5);
  const auto g = Hypothesis::flip(f, Hypothesis::interval(0.1, 0.2));
  CHECK(g(at(0.15)) == pos);
  CHECK(g(at(0.25)) == neg);
  CHECK(g(at(0.7)) == pos);
  CHECK(Hypothesis::negation(f)(at(0.7)) == neg);
  CHECK(g.children().size() == 2);
  CHECK(f.children().empty());
}

TEST_CASE("oracle examples") {
  const auto cls = HypothesisClass::thresholds();
  const LabeledSample gap{{at(0.2), neg}, {at(0.8), pos}};
  const auto h = consistent_hypothesis(cls, gap);
  REQUIRE(h);
  CHECK(h->theta() == doctest::Approx(0.5));

  const LabeledSample contradictory{{at(0.5), pos}, {at(0.5), neg}};
  CHECK_FALSE(consistent_hypothesis(cls, contradictory));
  const LabeledSample inverted{{at(0.3), pos}, {at(0.7), neg}};
  CHECK_FALSE(consistent_hypothesis(cls, inverted));

  const LabeledSample positives_only{{at(0.4), pos}, {at(0.6), pos}};
  CHECK(consistent_hypothesis(cls, positives_only)->theta() == doctest::Approx(0.2));
  const LabeledSample one_negative{{at(1.0), neg}};
  const auto top = consistent_hypothesis(cls, one_negative);
  REQUIRE(top);
  CHECK(count_mistakes(*top, one_negative) == 0);
}

TEST_CASE("oracle on an empty sample returns the class default") {
  CHECK(consistent_hypothesis(HypothesisClass::thresholds(), {})->theta() == 0.5);
  CHECK(consistent_hypothesis(HypothesisClass::intervals(), {})->is_empty_interval());
  CHECK(consistent_hypothesis(HypothesisClass::conjunctions(5), {})->mask() == 0b11111);
}

TEST_CASE("interval and conjunction oracles") {
  const LabeledSample s{{at(0.1), neg}, {at(0.3), pos}, {at(0.6), pos}, {at(0.9), neg}};
  const auto h = consistent_hypothesis(HypothesisClass::intervals(), s);
  REQUIRE(h);
  CHECK(h->bounds() == std::pair{0.3, 0.6});
  const LabeledSample hole{{at(0.3), pos}, {at(0.4), neg}, {at(0.6), pos}};
  CHECK_FALSE(consistent_hypothesis(HypothesisClass::intervals(), hole));

  const auto cls = HypothesisClass::conjunctions(4);
  const LabeledSample bits{{Instance::bits(0b1011, 4), pos},
                           {Instance::bits(0b0011, 4), pos},
                           {Instance::bits(0b0001, 4), neg}};
  const auto c = consistent_hypothesis(cls, bits);
  REQUIRE(c);
  CHECK(c->mask() == 0b0011);
  const LabeledSample bad{{Instance::bits(0b0011, 4), pos}, {Instance::bits(0b0111, 4), neg}};
  CHECK_FALSE(consistent_hypothesis(cls, bad));
  CHECK_THROWS_AS(consistent_hypothesis(cls, LabeledSample{{at(0.5), pos}}), InstanceSpaceMismatch);
}

TEST_CASE("oracle soundness on realizable samples") {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Instance> xs;
    const auto n = 1 + rng.below(30);
    for (std::uint64_t k = 0; k < n; ++k) xs.push_back(at(rng.uniform()));

    const auto t = Hypothesis::threshold(rng.uniform());
    auto ht = consistent_hypothesis(HypothesisClass::thresholds(), label_with(t, xs));
    REQUIRE(ht);
    CHECK(count_mistakes(*ht, label_with(t, xs)) == 0);

    const double lo = rng.uniform();
    const auto iv = Hypothesis::interval(lo, lo + (1.0 - lo) * rng.uniform());
    auto hi = consistent_hypothesis(HypothesisClass::intervals(), label_with(iv, xs));
    REQUIRE(hi);
    CHECK(count_mistakes(*hi, label_with(iv, xs)) == 0);

    std::vector<Instance> bs;
    for (std::uint64_t k = 0; k < n; ++k) bs.push_back(Instance::bits(rng.below(64), 6));
    const auto cj = Hypothesis::conjunction(rng.below(64), 6);
    auto hc = consistent_hypothesis(HypothesisClass::conjunctions(6), label_with(cj, bs));
    REQUIRE(hc);
    CHECK(count_mistakes(*hc, label_with(cj, bs)) == 0);
  }
}

TEST_CASE("vc dimensions") {
  CHECK(HypothesisClass::thresholds().vc_dimension() == 1);
  CHECK(HypothesisClass::intervals().vc_dimension() == 2);
  CHECK(HypothesisClass::conjunctions(9).vc_dimension() == 9);
}

TEST_CASE("sample complexity") {
  // Frozen from m_oracle.
  CHECK(m_oracle(1, 0.1L, 0.1L, 1) == 57);
  CHECK(m_oracle(1, 0.1L, 0.1L, 2) == 113);
  CHECK(m_oracle(1, 0.5L, 0.5L, 1) == 5);
  CHECK(sample_complexity(1, 0.1, 0.1, 1.0) == 57);
  CHECK(sample_complexity(1, 0.1, 0.1, 2.0) == 113);
  CHECK(sample_complexity(1, 0.5, 0.5, 1.0) == 5);
  CHECK(sample_complexity(HypothesisClass::thresholds(), 0.05, 0.1) == 126);
  CHECK(sample_complexity(HypothesisClass::thresholds(), 0.02, 0.1) == 361);

  for (unsigned d : {1u, 2u, 7u}) {
    for (double delta : {0.01, 0.1, 0.5}) {
      std::uint64_t prev = UINT64_MAX;
      for (double eps = 0.01; eps < 0.99; eps += 0.01) {
        const auto m = sample_complexity(d, eps, delta, 1.5);
        CHECK(m == m_oracle(d, eps, delta, 1.5L));
        CHECK(m <= prev);
        prev = m;
      }
    }
  }
  CHECK_THROWS_AS(sample_complexity(1, 0.0, 0.1), InvalidArgument);
  CHECK_THROWS_AS(sample_complexity(1, 0.1, 1.0), InvalidArgument);
  CHECK_THROWS_AS(sample_complexity(1, 0.1, 0.1, 0.0), InvalidArgument);
}

TEST_CASE("exact uniform geometry") {
  const auto f = Hypothesis::threshold(0.5);
  CHECK(uniform_disagreement(f, Hypothesis::threshold(0.6)) == doctest::Approx(0.1));
  CHECK(uniform_disagreement(f, f) == 0.0);
  CHECK(uniform_disagreement(f, Hypothesis::negation(f)) == doctest::Approx(1.0));
  CHECK(uniform_disagreement(f, Hypothesis::flip(f, Hypothesis::interval(0.1, 0.25))) ==
        doctest::Approx(0.15));

  // Agrees with a fine Riemann sum on random composites.
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = Hypothesis::threshold(rng.uniform());
    const auto b = Hypothesis::flip(Hypothesis::threshold(rng.uniform()),
                                    Hypothesis::interval(0.2, 0.2 + 0.5 * rng.uniform()));
    const int grid = 100000;
    int differ = 0;
    for (int k = 0; k < grid; ++k) {
      const Instance x = at((k + 0.5) / grid);
      if (a(x) != b(x)) ++differ;
    }
    CHECK(std::abs(uniform_disagreement(a, b) - static_cast<double>(differ) / grid) < 1e-4);
  }
}

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "crowdpac/crowd.hpp"
#include "crowdpac/error.hpp"
#include "crowdpac/hypothesis.hpp"

namespace crowdpac {

/// Filter configuration: N = ceil(round_constant * ln(1/eps)) rounds per instance.
struct FilterParams {
  double round_constant = 7.0;
  /// Lower bound on the perfect fraction used to size majority committees.
  double alpha_assumed = 0.7;

  void validate() const;
  std::uint64_t rounds(double eps) const;
};

/// Constants hidden inside the O(.) and Theta(.) of the learners.
struct LearnerConstants {
  double sample_constant = 1.0;    // C in m_{eps,delta}
  double filtered_factor = 4.0;    // |S_2| = factor * m_{eps,delta}
  double correct_factor = 4.0;     // |S_C| = factor * m_{sqrt eps,delta}
  double reweighted_factor = 4.0;  // |W| = factor * m_{sqrt eps,delta}
  double delta_scale = 0.1;        // c in delta' = c * alpha * delta
  double disagreement_cap = 100.0;  // region sampling gives up after cap * m / eps draws

  void validate() const;
};

/// Learner-level failure: the consistency oracle found no hypothesis.
class OracleFailure : public Error {
 public:
  OracleFailure(std::string phase, LabeledSample sample);
  const std::string& phase() const { return phase_; }
  const LabeledSample& sample() const { return sample_; }

 private:
  std::string phase_;
  LabeledSample sample_;
};

struct PhaseTiming {
  std::string phase;
  double seconds = 0.0;
};

struct RunReport {
  Hypothesis hypothesis = Hypothesis::threshold(0.5);
  MetricsRecord metrics;
  std::size_t restarts = 0;
  /// Phase 2 found no mislabeled point and the learner returned h1.
  bool h1_shortcut = false;
  /// Phase 3 found no disagreement between h1 and h2; h3 := h1.
  bool no_disagreement = false;
  /// Alpha after each restart of the robust learner, starting with the input.
  std::vector<double> alpha_trace;
  std::vector<PhaseTiming> timings;
};

// ---------------------------------------------------------------------------
// Building blocks

/// next_odd(ceil(ln(2n / delta) / (2 (alpha - 1/2)^2))); Hoeffding committee
/// for labeling n points correctly with probability 1 - delta.
std::uint64_t majority_committee_size(std::uint64_t n, double delta, double alpha);

/// next_odd(ceil((32 / alpha^2) ln(2n / delta))); estimates Maj-size within alpha/8.
std::uint64_t prune_committee_size(std::uint64_t n, double delta, double alpha);

/// Labels each instance by the majority of a fresh committee drawn from the
/// pool's current (conditioned) distribution.
LabeledSample correct_label(World& world, std::span<const Instance> instances, double delta,
                            double alpha_assumed);

struct FilterResult {
  std::vector<Instance> retained;  // S_I
  std::uint64_t queries = 0;
  std::vector<std::uint32_t> queries_per_instance;
  std::vector<bool> kept;  // per input instance
};

/// Probabilistic filter: per instance, query one labeler at a time for up to
/// N rounds and drop the instance as soon as the running majority over an odd
/// number of answers equals h(x).
FilterResult filter_instances(World& world, std::span<const Instance> instances,
                              const Hypothesis& h, double eps, const FilterParams& params);

/// Probability that a gambler holding i units, winning each unit bet with
/// probability p against an opponent holding N units, goes broke:
/// (1 - r^N) / (1 - r^(N+i)) with r = p / (1 - p). Throws for p = 1/2.
double ruin_probability(double p, std::uint64_t N, std::uint64_t i);

/// m draws from the equal mixture of the two multisets (fair coin, then uniform
/// with replacement). nullopt when w_incorrect is empty, which tells the
/// caller to return h1. Throws InvalidArgument if w_correct is empty.
std::optional<LabeledSample> simulate_d2_sample(Rng& rng, const LabeledSample& w_incorrect,
                                                const LabeledSample& w_correct, std::size_t m);

struct DisagreementSample {
  std::vector<Instance> instances;
  std::uint64_t draws = 0;
  /// Cap exhausted with fewer than m instances kept.
  bool truncated = false;
  bool no_disagreement() const { return instances.empty(); }
};

/// Rejection sampling from D|X conditioned on h1(x) != h2(x). Requires
/// attempt_cap >= m.
DisagreementSample sample_disagreement_region(World& world, const Hypothesis& h1,
                                              const Hypothesis& h2, std::size_t m,
                                              std::uint64_t attempt_cap);

struct Labeled {
  LabeledSample sample;
};
struct Pruned {
  LabeledExample test_pair;
  double new_alpha = 0.0;
};
using PruneOutcome = std::variant<Labeled, Pruned>;

/// Committee labeling that stops at the first weak-majority instance
/// (Maj-size <= 1 - alpha/4), spends one golden query on it, and conditions the
/// pool on the answer.
PruneOutcome prune_and_label(World& world, std::span<const Instance> instances, double delta,
                             double alpha);

// ---------------------------------------------------------------------------
// Learners

/// Majority-vote labeling of m_{eps,delta} instances followed by the oracle.
RunReport baseline(World& world, const HypothesisClass& cls, double eps, double delta,
                   double alpha, const LearnerConstants& constants = {});

/// Three-phase boosting with probabilistic filtering for alpha >= 0.7.
RunReport interleave_learn(World& world, const HypothesisClass& cls, double eps, double delta,
                           const FilterParams& params = {}, const LearnerConstants& constants = {});

/// Any-alpha learner: golden-query pruning wrapped around the three-phase
/// scheme; delegates to interleave_learn once alpha > 3/4.
RunReport robust_learn(World& world, const HypothesisClass& cls, double eps, double delta,
                       double alpha, const FilterParams& params = {},
                       const LearnerConstants& constants = {});

/// ceil((16 / alpha) ln(1 / alpha)), the restart envelope of robust_learn.
std::size_t restart_envelope(double alpha);

}  // namespace crowdpac

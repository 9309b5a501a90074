#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "crowdpac/hypothesis.hpp"
#include "crowdpac/random.hpp"

namespace crowdpac {

// ---------------------------------------------------------------------------
// Instance distributions

struct UniformUnit {};

/// Finite weighted multiset; weights need not be normalized.
struct WeightedPoints {
  std::vector<Instance> points;
  std::vector<double> weights;
};

/// Independent bits, each set with probability p_one.
struct UniformBits {
  unsigned width = 8;
  double p_one = 0.5;
};

using Distribution = std::variant<UniformUnit, WeightedPoints, UniformBits>;

InstanceSpace distribution_space(const Distribution& d);

// ---------------------------------------------------------------------------
// Labelers

/// Answers f*(x).
struct Perfect {};
/// Answers h(x) for a fixed h.
struct FixedHypothesis {
  Hypothesis h;
};
/// Member of a block sharing one wrong hypothesis.
struct Colluder {
  int group = 0;
  Hypothesis h;
};
/// Answers f*(x), flipped on a pseudo-random region of the given mass. The
/// region is a seeded hash of (labeler, instance identity).
struct HashNoise {
  double flip_mass = 0.1;
  std::uint64_t salt = 0;
};
/// Answers the negation of the majority recorded so far for the instance
/// (or -f*(x) on a tie). Outside the fixed-function labeler model.
struct AdaptiveAdversary {};

using LabelerBehavior = std::variant<Perfect, FixedHypothesis, Colluder, HashNoise, AdaptiveAdversary>;

std::string describe(const LabelerBehavior& b);

struct WeightedBehavior {
  LabelerBehavior behavior;
  double weight = 1.0;
};

/// Unbounded pool: each draw is a fresh labeler, Perfect with probability alpha
/// and otherwise drawn from bad_mix by weight.
struct InfinitePool {
  double alpha = 1.0;
  std::vector<WeightedBehavior> bad_mix;
};

/// Fixed list of labelers drawn uniformly.
struct FinitePool {
  std::vector<LabelerBehavior> labelers;
};

struct PoolSpec {
  std::variant<InfinitePool, FinitePool> mode = InfinitePool{};
  /// Maximum conditioning length; nullopt derives ceil((16/alpha) ln(1/alpha))
  /// from an infinite pool's alpha and the pool size for a finite pool.
  std::optional<std::size_t> conditioning_budget;
  /// Candidate draws allowed per conditioned draw.
  std::size_t rejection_cap = 10'000;
  /// Keep per-instance answer tallies. Always on when an adaptive labeler can appear.
  bool record_history = false;
};

using LabelerId = std::uint64_t;

/// ceil((16 / alpha) * ln(1 / alpha)); the bound on prunes for a minority-perfect crowd.
std::size_t pruning_budget(double alpha);

// ---------------------------------------------------------------------------
// Accounting

struct AnswerTally {
  std::uint32_t positive = 0;
  std::uint32_t negative = 0;
};

/// Exact record of every label query and golden query.
class QueryLedger {
 public:
  explicit QueryLedger(bool record_history = false) : record_history_(record_history) {}

  void charge(LabelerId id, const Instance& x, Label answer);
  void charge_golden() { ++golden_; }

  std::uint64_t total_queries() const { return total_; }
  std::uint64_t golden_queries() const { return golden_; }
  /// Max queries answered by one labeler.
  std::uint64_t load() const { return max_load_; }
  std::uint64_t distinct_labelers() const { return distinct_; }
  std::uint64_t queries_for(LabelerId id) const;
  std::uint64_t sum_per_labeler() const;
  std::span<const std::uint64_t> per_labeler() const { return per_labeler_; }

  bool records_history() const { return record_history_; }
  /// Answers recorded so far for an instance (zeros when history is off).
  AnswerTally tally(const Instance& x) const;

 private:
  std::uint64_t total_ = 0;
  std::uint64_t golden_ = 0;
  std::uint64_t max_load_ = 0;
  std::uint64_t distinct_ = 0;
  std::vector<std::uint64_t> per_labeler_;  // labeler ids are dense
  bool record_history_;
  std::unordered_map<std::uint64_t, AnswerTally> history_;
};

struct MetricsRecord {
  std::uint64_t total_queries = 0;
  std::uint64_t m_realizable = 0;
  double cost_per_example = 0.0;  // total_queries / m_realizable
  std::uint64_t load = 0;
  std::uint64_t golden_queries = 0;
  std::uint64_t distinct_labelers = 0;
};

// ---------------------------------------------------------------------------

/// The labeler distribution P, optionally conditioned on labeled test pairs,
/// together with its query ledger.
class LabelerPool {
 public:
  LabelerPool(PoolSpec spec, Hypothesis target, std::uint64_t seed);

  /// Drawing is free; only queries are charged.
  LabelerId draw();
  /// Rejection sampling from P conditioned on agreement with every pair.
  /// Each probe is charged to the candidate; throws RejectionBudgetExceeded.
  LabelerId draw_conditioned(std::span<const LabeledExample> conditioning);
  /// Draw from the pool's current conditioned distribution.
  LabelerId draw_active() { return draw_conditioned(conditioning_); }

  /// Charged query. Throws UnknownLabeler for ids never drawn.
  Label query(LabelerId id, const Instance& x);
  /// The answer query() would give, without charging the ledger.
  Label peek(LabelerId id, const Instance& x) const;

  const LabelerBehavior& behavior(LabelerId id) const;
  bool is_perfect(LabelerId id) const;
  bool is_infinite() const { return std::holds_alternative<InfinitePool>(spec_.mode); }
  std::size_t size() const;  // finite pools: labeler count; infinite: ids minted

  void add_conditioning(LabeledExample pair);
  std::span<const LabeledExample> conditioning() const { return conditioning_; }
  std::size_t conditioning_budget() const { return budget_; }

  const QueryLedger& ledger() const { return ledger_; }
  QueryLedger& ledger() { return ledger_; }
  const Hypothesis& target() const { return target_; }
  const PoolSpec& spec() const { return spec_; }

 private:
  Label answer(LabelerId id, const Instance& x) const;
  void require_known(LabelerId id) const;

  PoolSpec spec_;
  Hypothesis target_;
  Rng rng_;
  std::vector<double> bad_cumulative_;
  std::vector<std::int32_t> minted_;  // infinite mode: -1 perfect, else bad_mix index
  std::vector<LabeledExample> conditioning_;
  std::size_t budget_ = 0;
  QueryLedger ledger_;
};

struct WorldSpec {
  Distribution distribution = UniformUnit{};
  Hypothesis target = Hypothesis::threshold(0.5);
  PoolSpec pool;
  std::uint64_t seed = 1;
};

/// One simulated environment: D|X, f*, the labeler pool and golden-query
/// access. Owned by a single trial.
///
/// Randomness comes from independent streams derived from the seed: instances
/// (1), labelers (2), learner-internal choices (3), error estimation (4).
class World {
 public:
  explicit World(WorldSpec spec);

  Instance draw_instance();
  std::vector<Instance> draw_instances(std::size_t n);
  /// f*(x); charges one golden query.
  Label golden_query(const Instance& x);

  const Hypothesis& target() const { return spec_.target; }
  const Distribution& distribution() const { return spec_.distribution; }
  std::uint64_t seed() const { return spec_.seed; }

  LabelerPool& pool() { return pool_; }
  const LabelerPool& pool() const { return pool_; }
  Rng& learner_rng() { return learner_rng_; }
  Rng& evaluation_rng() { return evaluation_rng_; }

  /// A draw from the distribution using an external stream.
  Instance sample(Rng& rng) const;

 private:
  WorldSpec spec_;
  std::vector<double> cumulative_;
  Rng instance_rng_;
  Rng learner_rng_;
  Rng evaluation_rng_;
  LabelerPool pool_;
};

/// Strict majority of an odd-sized committee; throws TieForbidden on even size
/// and InvalidArgument on an empty list.
Label majority_label(std::span<const Label> labels);
/// Fraction of the committee agreeing with its majority value.
double majority_size(std::span<const Label> labels);

/// Smallest odd integer >= n.
constexpr std::uint64_t next_odd(std::uint64_t n) { return n % 2 == 1 ? n : n + 1; }

/// Ledger totals with Lambda = total_queries / m_realizable.
MetricsRecord ledger_report(const LabelerPool& pool, std::uint64_t m_realizable);

}  // namespace crowdpac

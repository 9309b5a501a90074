#include <cmath>

#include "crowdpac/learner.hpp"

namespace crowdpac {

void FilterParams::validate() const {
  if (!(round_constant > 0.0)) throw InvalidArgument("filter round constant must be positive");
  if (!(alpha_assumed > 0.5 && alpha_assumed <= 1.0)) {
    throw InvalidArgument("assumed alpha must lie in (1/2, 1]");
  }
}

std::uint64_t FilterParams::rounds(double eps) const {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("eps must lie in (0,1)");
  const double n = std::ceil(round_constant * std::log(1.0 / eps));
  return n < 1.0 ? 1 : static_cast<std::uint64_t>(n);
}

void LearnerConstants::validate() const {
  if (!(sample_constant > 0.0) || !(filtered_factor > 0.0) || !(correct_factor > 0.0) ||
      !(reweighted_factor > 0.0) || !(disagreement_cap >= 1.0)) {
    throw InvalidArgument("learner constants must be positive (disagreement cap >= 1)");
  }
  if (!(delta_scale > 0.0 && delta_scale <= 1.0)) {
    throw InvalidArgument("delta scale must lie in (0,1]");
  }
}

OracleFailure::OracleFailure(std::string phase, LabeledSample sample)
    : Error("consistency oracle returned None in " + phase + " on " +
            std::to_string(sample.size()) + " labeled instances"),
      phase_(std::move(phase)),
      sample_(std::move(sample)) {}

std::uint64_t majority_committee_size(std::uint64_t n, double delta, double alpha) {
  if (n == 0) throw InvalidArgument("committee for an empty sample");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0,1)");
  if (!(alpha > 0.5 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in (1/2, 1]");
  const double gap = alpha - 0.5;
  const double k = std::ceil(std::log(2.0 * static_cast<double>(n) / delta) / (2.0 * gap * gap));
  return next_odd(static_cast<std::uint64_t>(std::max(k, 1.0)));
}

std::uint64_t prune_committee_size(std::uint64_t n, double delta, double alpha) {
  if (n == 0) throw InvalidArgument("committee for an empty sample");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0,1)");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in (0,1]");
  const double k =
      std::ceil((32.0 / (alpha * alpha)) * std::log(2.0 * static_cast<double>(n) / delta));
  return next_odd(static_cast<std::uint64_t>(std::max(k, 1.0)));
}

namespace {

Label committee_vote(LabelerPool& pool, const Instance& x, std::vector<Label>& votes) {
  for (auto& v : votes) v = pool.query(pool.draw_active(), x);
  return majority_label(votes);
}

}  // namespace

LabeledSample correct_label(World& world, std::span<const Instance> instances, double delta,
                            double alpha_assumed) {
  LabeledSample out;
  if (instances.empty()) return out;
  std::vector<Label> votes(majority_committee_size(instances.size(), delta, alpha_assumed));
  out.reserve(instances.size());
  for (const auto& x : instances) out.push_back({x, committee_vote(world.pool(), x, votes)});
  return out;
}

FilterResult filter_instances(World& world, std::span<const Instance> instances,
                              const Hypothesis& h, double eps, const FilterParams& params) {
  params.validate();
  const std::uint64_t rounds = params.rounds(eps);
  auto& pool = world.pool();
  FilterResult result;
  result.queries_per_instance.reserve(instances.size());
  result.kept.reserve(instances.size());
  for (const auto& x : instances) {
    const Label predicted = evaluate(h, x);
    std::uint64_t agree = 0;
    std::uint64_t disagree = 0;
    bool dropped = false;
    std::uint64_t t = 1;
    for (; t <= rounds; ++t) {
      if (pool.query(pool.draw_active(), x) == predicted) {
        ++agree;
      } else {
        ++disagree;
      }
      if (t % 2 == 1 && agree > disagree) {
        dropped = true;
        break;
      }
    }
    const std::uint64_t used = agree + disagree;
    result.queries += used;
    result.queries_per_instance.push_back(static_cast<std::uint32_t>(used));
    result.kept.push_back(!dropped);
    if (!dropped) result.retained.push_back(x);
  }
  return result;
}

double ruin_probability(double p, std::uint64_t N, std::uint64_t i) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("win probability must lie in (0,1)");
  if (p == 0.5) throw InvalidArgument("ruin formula degenerates at p = 1/2; use N / (N + i)");
  if (N < 1 || i < 1) throw InvalidArgument("stakes must be at least 1");
  const double r = p / (1.0 - p);
  const double n = static_cast<double>(N);
  const double total = static_cast<double>(N + i);
  if (r < 1.0) return (1.0 - std::pow(r, n)) / (1.0 - std::pow(r, total));
  // Same ratio after dividing through by r^(N+i); stays finite for large N.
  const double s = 1.0 / r;
  return (std::pow(s, static_cast<double>(i)) - std::pow(s, total)) / (1.0 - std::pow(s, total));
}

std::optional<LabeledSample> simulate_d2_sample(Rng& rng, const LabeledSample& w_incorrect,
                                                const LabeledSample& w_correct, std::size_t m) {
  if (w_incorrect.empty()) return std::nullopt;
  if (w_correct.empty()) throw InvalidArgument("reweighting needs a nonempty correct set");
  LabeledSample out;
  out.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto& side = rng.bernoulli(0.5) ? w_incorrect : w_correct;
    out.push_back(side[rng.below(side.size())]);
  }
  return out;
}

DisagreementSample sample_disagreement_region(World& world, const Hypothesis& h1,
                                              const Hypothesis& h2, std::size_t m,
                                              std::uint64_t attempt_cap) {
  if (attempt_cap < m) throw InvalidArgument("attempt cap below requested sample size");
  DisagreementSample out;
  out.instances.reserve(m);
  while (out.instances.size() < m && out.draws < attempt_cap) {
    const Instance x = world.draw_instance();
    ++out.draws;
    if (evaluate(h1, x) != evaluate(h2, x)) out.instances.push_back(x);
  }
  out.truncated = out.instances.size() < m;
  return out;
}

PruneOutcome prune_and_label(World& world, std::span<const Instance> instances, double delta,
                             double alpha) {
  Labeled labeled;
  if (instances.empty()) return labeled;
  const std::uint64_t k = prune_committee_size(instances.size(), delta, alpha);
  const double weak = 1.0 - alpha / 4.0;
  std::vector<Label> votes(k);
  labeled.sample.reserve(instances.size());
  for (const auto& x : instances) {
    const Label majority = committee_vote(world.pool(), x, votes);
    if (majority_size(votes) <= weak) {
      const LabeledExample test{x, world.golden_query(x)};
      world.pool().add_conditioning(test);
      return Pruned{test, alpha / (1.0 - alpha / 8.0)};
    }
    labeled.sample.push_back({x, majority});
  }
  return labeled;
}

std::size_t restart_envelope(double alpha) { return pruning_budget(alpha); }

}  // namespace crowdpac

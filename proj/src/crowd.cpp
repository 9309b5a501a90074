#include "crowdpac/crowd.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "crowdpac/error.hpp"

namespace crowdpac {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

std::vector<double> cumulative_weights(std::span<const double> weights) {
  std::vector<double> out;
  out.reserve(weights.size());
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("weights must be finite and >= 0");
    sum += w;
    out.push_back(sum);
  }
  if (!(sum > 0.0)) throw InvalidArgument("weights must have positive total");
  return out;
}

std::size_t pick(std::span<const double> cumulative, double u) {
  const double target = u * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                               cumulative.size() - 1);
}

bool has_adaptive(const PoolSpec& spec) {
  return std::visit(
      Overloaded{
          [](const InfinitePool& p) {
            return std::any_of(p.bad_mix.begin(), p.bad_mix.end(), [](const WeightedBehavior& w) {
              return std::holds_alternative<AdaptiveAdversary>(w.behavior);
            });
          },
          [](const FinitePool& p) {
            return std::any_of(p.labelers.begin(), p.labelers.end(), [](const LabelerBehavior& b) {
              return std::holds_alternative<AdaptiveAdversary>(b);
            });
          },
      },
      spec.mode);
}

void check_behavior_space(const LabelerBehavior& b, const Hypothesis& target) {
  const Hypothesis* h = nullptr;
  if (const auto* f = std::get_if<FixedHypothesis>(&b)) h = &f->h;
  if (const auto* c = std::get_if<Colluder>(&b)) h = &c->h;
  if (h != nullptr && !(h->space() == target.space())) {
    throw InstanceSpaceMismatch("labeler hypothesis over " + h->space().describe() +
                                " but target over " + target.space().describe());
  }
  if (const auto* n = std::get_if<HashNoise>(&b)) {
    if (!(n->flip_mass >= 0.0 && n->flip_mass <= 1.0)) {
      throw InvalidArgument("hash-noise flip mass must lie in [0,1]");
    }
  }
}

}  // namespace

InstanceSpace distribution_space(const Distribution& d) {
  return std::visit(Overloaded{
                        [](const UniformUnit&) { return InstanceSpace::unit_interval(); },
                        [](const WeightedPoints& w) {
                          return w.points.empty() ? InstanceSpace::unit_interval()
                                                  : w.points.front().space();
                        },
                        [](const UniformBits& b) { return InstanceSpace::bits(b.width); },
                    },
                    d);
}

std::string describe(const LabelerBehavior& b) {
  return std::visit(Overloaded{
                        [](const Perfect&) { return std::string("perfect"); },
                        [](const FixedHypothesis& f) { return "fixed:" + f.h.describe(); },
                        [](const Colluder& c) {
                          return "colluder[" + std::to_string(c.group) + "]:" + c.h.describe();
                        },
                        [](const HashNoise& n) { return "hashnoise:" + std::to_string(n.flip_mass); },
                        [](const AdaptiveAdversary&) { return std::string("adaptive"); },
                    },
                    b);
}

std::size_t pruning_budget(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in (0,1]");
  return static_cast<std::size_t>(std::ceil((16.0 / alpha) * std::log(1.0 / alpha)));
}

// ---------------------------------------------------------------------------

void QueryLedger::charge(LabelerId id, const Instance& x, Label answer) {
  if (id >= per_labeler_.size()) per_labeler_.resize(id + 1, 0);
  auto& count = per_labeler_[id];
  if (count == 0) ++distinct_;
  ++count;
  ++total_;
  max_load_ = std::max(max_load_, count);
  if (record_history_) {
    auto& t = history_[x.identity()];
    if (answer == Label::positive) {
      ++t.positive;
    } else {
      ++t.negative;
    }
  }
}

std::uint64_t QueryLedger::queries_for(LabelerId id) const {
  return id < per_labeler_.size() ? per_labeler_[id] : 0;
}

std::uint64_t QueryLedger::sum_per_labeler() const {
  return std::accumulate(per_labeler_.begin(), per_labeler_.end(), std::uint64_t{0});
}

AnswerTally QueryLedger::tally(const Instance& x) const {
  const auto it = history_.find(x.identity());
  return it == history_.end() ? AnswerTally{} : it->second;
}

// ---------------------------------------------------------------------------

LabelerPool::LabelerPool(PoolSpec spec, Hypothesis target, std::uint64_t seed)
    : spec_(std::move(spec)),
      target_(std::move(target)),
      rng_(seed),
      ledger_(spec_.record_history || has_adaptive(spec_)) {
  if (spec_.rejection_cap == 0) throw InvalidArgument("rejection cap must be positive");
  if (auto* inf = std::get_if<InfinitePool>(&spec_.mode)) {
    if (!(inf->alpha >= 0.0 && inf->alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0,1]");
    if (inf->alpha < 1.0) {
      if (inf->bad_mix.empty()) throw InvalidArgument("alpha < 1 needs a bad-labeler mix");
      std::vector<double> w;
      for (const auto& wb : inf->bad_mix) {
        check_behavior_space(wb.behavior, target_);
        w.push_back(wb.weight);
      }
      bad_cumulative_ = cumulative_weights(w);
    }
    budget_ = spec_.conditioning_budget.value_or(inf->alpha > 0.0 ? pruning_budget(inf->alpha) : 0);
  } else {
    const auto& fin = std::get<FinitePool>(spec_.mode);
    if (fin.labelers.empty()) throw InvalidArgument("finite pool needs at least one labeler");
    for (const auto& b : fin.labelers) check_behavior_space(b, target_);
    budget_ = spec_.conditioning_budget.value_or(fin.labelers.size());
  }
}

std::size_t LabelerPool::size() const {
  if (const auto* fin = std::get_if<FinitePool>(&spec_.mode)) return fin->labelers.size();
  return minted_.size();
}

LabelerId LabelerPool::draw() {
  if (const auto* fin = std::get_if<FinitePool>(&spec_.mode)) {
    return rng_.below(fin->labelers.size());
  }
  const auto& inf = std::get<InfinitePool>(spec_.mode);
  std::int32_t kind = -1;
  if (!rng_.bernoulli(inf.alpha)) {
    kind = static_cast<std::int32_t>(pick(bad_cumulative_, rng_.uniform()));
  }
  minted_.push_back(kind);
  return minted_.size() - 1;
}

LabelerId LabelerPool::draw_conditioned(std::span<const LabeledExample> conditioning) {
  if (conditioning.empty()) return draw();
  for (std::size_t attempt = 0; attempt < spec_.rejection_cap; ++attempt) {
    const LabelerId candidate = draw();
    bool agrees = true;
    for (const auto& [x, y] : conditioning) {
      if (query(candidate, x) != y) agrees = false;
    }
    if (agrees) return candidate;
  }
  throw RejectionBudgetExceeded("no labeler agreed with " + std::to_string(conditioning.size()) +
                                " conditioning pairs within " +
                                std::to_string(spec_.rejection_cap) + " candidates");
}

void LabelerPool::require_known(LabelerId id) const {
  if (id >= size()) throw UnknownLabeler("labeler id " + std::to_string(id) + " was never drawn");
}

const LabelerBehavior& LabelerPool::behavior(LabelerId id) const {
  require_known(id);
  if (const auto* fin = std::get_if<FinitePool>(&spec_.mode)) return fin->labelers[id];
  static const LabelerBehavior perfect = Perfect{};
  const auto kind = minted_[id];
  return kind < 0 ? perfect : std::get<InfinitePool>(spec_.mode).bad_mix[kind].behavior;
}

bool LabelerPool::is_perfect(LabelerId id) const {
  return std::holds_alternative<Perfect>(behavior(id));
}

Label LabelerPool::answer(LabelerId id, const Instance& x) const {
  const auto& b = behavior(id);
  return std::visit(
      Overloaded{
          [&](const Perfect&) { return target_(x); },
          [&](const FixedHypothesis& f) { return f.h(x); },
          [&](const Colluder& c) { return c.h(x); },
          [&](const HashNoise& n) {
            const std::uint64_t h = splitmix64(x.identity() ^ derive_seed(n.salt, id));
            const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
            return u < n.flip_mass ? -target_(x) : target_(x);
          },
          [&](const AdaptiveAdversary&) {
            const auto t = ledger_.tally(x);
            if (t.positive == t.negative) return -target_(x);
            return t.positive > t.negative ? Label::negative : Label::positive;
          },
      },
      b);
}

Label LabelerPool::query(LabelerId id, const Instance& x) {
  if (!(x.space() == target_.space())) {
    throw InstanceSpaceMismatch("query instance in " + x.space().describe() +
                                " but labelers answer over " + target_.space().describe());
  }
  const Label y = answer(id, x);
  ledger_.charge(id, x, y);
  return y;
}

Label LabelerPool::peek(LabelerId id, const Instance& x) const { return answer(id, x); }

void LabelerPool::add_conditioning(LabeledExample pair) {
  if (conditioning_.size() >= budget_) {
    throw ConditioningBudgetExceeded("conditioning budget of " + std::to_string(budget_) +
                                     " pairs exhausted");
  }
  conditioning_.push_back(std::move(pair));
}

// ---------------------------------------------------------------------------

namespace {

const Distribution& validated(const WorldSpec& spec) {
  if (const auto* w = std::get_if<WeightedPoints>(&spec.distribution)) {
    if (w->points.empty()) throw InvalidArgument("weighted-point distribution is empty");
    if (w->points.size() != w->weights.size()) {
      throw InvalidArgument("weighted-point distribution needs one weight per point");
    }
    for (const auto& p : w->points) {
      if (!(p.space() == w->points.front().space())) {
        throw InstanceSpaceMismatch("weighted points mix instance spaces");
      }
    }
  }
  if (const auto* b = std::get_if<UniformBits>(&spec.distribution)) {
    if (b->width == 0 || b->width > 64) throw InvalidArgument("bit width must be in [1,64]");
    if (!(b->p_one >= 0.0 && b->p_one <= 1.0)) throw InvalidArgument("p_one must lie in [0,1]");
  }
  if (!(distribution_space(spec.distribution) == spec.target.space())) {
    throw InstanceSpaceMismatch("target over " + spec.target.space().describe() +
                                " but distribution over " +
                                distribution_space(spec.distribution).describe());
  }
  return spec.distribution;
}

}  // namespace

World::World(WorldSpec spec)
    : spec_(std::move(spec)),
      instance_rng_(derive_seed(spec_.seed, 1)),
      learner_rng_(derive_seed(spec_.seed, 3)),
      evaluation_rng_(derive_seed(spec_.seed, 4)),
      pool_(spec_.pool, spec_.target, derive_seed(spec_.seed, 2)) {
  if (const auto* w = std::get_if<WeightedPoints>(&validated(spec_))) {
    cumulative_ = cumulative_weights(w->weights);
  }
}

Instance World::sample(Rng& rng) const {
  return std::visit(Overloaded{
                        [&](const UniformUnit&) { return Instance::scalar(rng.uniform()); },
                        [&](const WeightedPoints& w) { return w.points[pick(cumulative_, rng.uniform())]; },
                        [&](const UniformBits& b) {
                          std::uint64_t bits = 0;
                          for (unsigned i = 0; i < b.width; ++i) {
                            if (rng.bernoulli(b.p_one)) bits |= std::uint64_t{1} << i;
                          }
                          return Instance::bits(bits, b.width);
                        },
                    },
                    spec_.distribution);
}

Instance World::draw_instance() { return sample(instance_rng_); }

std::vector<Instance> World::draw_instances(std::size_t n) {
  std::vector<Instance> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(draw_instance());
  return out;
}

Label World::golden_query(const Instance& x) {
  const Label y = evaluate(spec_.target, x);
  pool_.ledger().charge_golden();
  return y;
}

// ---------------------------------------------------------------------------

Label majority_label(std::span<const Label> labels) {
  if (labels.empty()) throw InvalidArgument("majority of an empty committee");
  if (labels.size() % 2 == 0) {
    throw TieForbidden("majority vote over an even committee of " + std::to_string(labels.size()));
  }
  long sum = 0;
  for (Label y : labels) sum += to_int(y);
  return sum > 0 ? Label::positive : Label::negative;
}

double majority_size(std::span<const Label> labels) {
  if (labels.empty()) throw InvalidArgument("majority size of an empty committee");
  const auto pos = std::count(labels.begin(), labels.end(), Label::positive);
  const auto neg = static_cast<std::ptrdiff_t>(labels.size()) - pos;
  return static_cast<double>(std::max(pos, neg)) / static_cast<double>(labels.size());
}

MetricsRecord ledger_report(const LabelerPool& pool, std::uint64_t m_realizable) {
  if (m_realizable == 0) throw InvalidArgument("m_realizable must be positive");
  const auto& ledger = pool.ledger();
  MetricsRecord r;
  r.total_queries = ledger.total_queries();
  r.m_realizable = m_realizable;
  r.cost_per_example = static_cast<double>(r.total_queries) / static_cast<double>(m_realizable);
  r.load = ledger.load();
  r.golden_queries = ledger.golden_queries();
  r.distinct_labelers = ledger.distinct_labelers();
  return r;
}

}  // namespace crowdpac

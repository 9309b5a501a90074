#include <chrono>
#include <cmath>
#include <functional>

#include "crowdpac/learner.hpp"

namespace crowdpac {

namespace {

using Clock = std::chrono::steady_clock;

class PhaseClock {
 public:
  explicit PhaseClock(std::vector<PhaseTiming>& out) : out_(out), start_(Clock::now()) {}
  void lap(std::string phase) {
    const auto now = Clock::now();
    out_.push_back({std::move(phase), std::chrono::duration<double>(now - start_).count()});
    start_ = now;
  }

 private:
  std::vector<PhaseTiming>& out_;
  Clock::time_point start_;
};

std::size_t scaled(double factor, std::uint64_t m) {
  return static_cast<std::size_t>(std::ceil(factor * static_cast<double>(m)));
}

void validate_target(double eps, double delta) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("eps must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0,1)");
}

Hypothesis fit(const HypothesisClass& cls, const LabeledSample& sample, const char* phase) {
  auto h = consistent_hypothesis(cls, sample);
  if (!h) throw OracleFailure(phase, sample);
  return *h;
}

/// Labels a sample; nullopt means the labeler pool was pruned and the caller
/// must restart.
using LabelStep = std::function<std::optional<LabeledSample>(std::span<const Instance>)>;

/// Sample-size and confidence parameters of one three-phase pass.
struct PassPlan {
  double eps;
  double confidence;        // delta in m_{eps,delta} for S_2, S_C, W
  double phase_confidence;  // delta in m_{sqrt eps, .} for S_1 and S_3
};

/// Phases 1-3 shared by the interleaving and any-alpha learners. Returns
/// nullopt if a labeling step pruned the pool.
std::optional<Hypothesis> three_phases(World& world, const HypothesisClass& cls,
                                       const PassPlan& plan, const LabelStep& label,
                                       const FilterParams& params,
                                       const LearnerConstants& constants, RunReport& report) {
  const double C = constants.sample_constant;
  const double root = std::sqrt(plan.eps);
  const std::uint64_t m_eps = sample_complexity(cls, plan.eps, plan.confidence, C);
  const std::uint64_t m_root = sample_complexity(cls, root, plan.confidence, C);
  const std::uint64_t m_root_phase = sample_complexity(cls, root, plan.phase_confidence, C);
  PhaseClock clock(report.timings);

  // Phase 1: h1 with error O(sqrt eps) from a correctly labeled sample.
  const auto s1 = world.draw_instances(2 * m_root_phase);
  auto labeled1 = label(s1);
  if (!labeled1) return std::nullopt;
  const Hypothesis h1 = fit(cls, *labeled1, "phase 1");
  clock.lap("phase 1");

  // Phase 2: filter against h1, relabel, and learn on the equal mixture of
  // h1-correct and h1-incorrect points.
  const auto s2 = world.draw_instances(scaled(constants.filtered_factor, m_eps));
  auto filtered = filter_instances(world, s2, h1, plan.eps, params);
  auto pooled = std::move(filtered.retained);
  const auto sc = world.draw_instances(scaled(constants.correct_factor, m_root));
  pooled.insert(pooled.end(), sc.begin(), sc.end());
  auto labeled_all = label(pooled);
  if (!labeled_all) return std::nullopt;
  LabeledSample w_incorrect;
  LabeledSample w_correct;
  for (const auto& ex : *labeled_all) {
    (h1(ex.x) != ex.y ? w_incorrect : w_correct).push_back(ex);
  }
  const auto reweighted = simulate_d2_sample(world.learner_rng(), w_incorrect, w_correct,
                                             scaled(constants.reweighted_factor, m_root));
  if (!reweighted) {
    report.h1_shortcut = true;
    clock.lap("phase 2");
    return h1;
  }
  const Hypothesis h2 = fit(cls, *reweighted, "phase 2");
  clock.lap("phase 2");

  // Phase 3: h3 on the region where h1 and h2 disagree.
  const std::size_t m3 = 2 * m_root_phase;
  const auto cap = static_cast<std::uint64_t>(
      std::ceil(constants.disagreement_cap * static_cast<double>(m3) / plan.eps));
  const auto region = sample_disagreement_region(world, h1, h2, m3, cap);
  Hypothesis h3 = h1;
  if (region.no_disagreement()) {
    report.no_disagreement = true;
  } else {
    auto labeled3 = label(region.instances);
    if (!labeled3) return std::nullopt;
    h3 = fit(cls, *labeled3, "phase 3");
  }
  clock.lap("phase 3");
  return combine_majority3(h1, h2, h3);
}

void finish(RunReport& report, const World& world, const HypothesisClass& cls, double eps,
            double delta, const LearnerConstants& constants) {
  report.metrics =
      ledger_report(world.pool(), sample_complexity(cls, eps, delta, constants.sample_constant));
}

}  // namespace

RunReport baseline(World& world, const HypothesisClass& cls, double eps, double delta,
                   double alpha, const LearnerConstants& constants) {
  validate_target(eps, delta);
  constants.validate();
  RunReport report;
  PhaseClock clock(report.timings);
  const std::uint64_t m = sample_complexity(cls, eps, delta, constants.sample_constant);
  const auto sample = world.draw_instances(m);
  // Same Hoeffding committee as correct_label, sized for m points at confidence delta.
  std::vector<Label> votes(majority_committee_size(m, delta, alpha));
  LabeledSample labeled;
  labeled.reserve(m);
  auto& pool = world.pool();
  for (const auto& x : sample) {
    for (auto& v : votes) v = pool.query(pool.draw_active(), x);
    labeled.push_back({x, majority_label(votes)});
  }
  clock.lap("label");
  report.hypothesis = fit(cls, labeled, "baseline");
  clock.lap("fit");
  finish(report, world, cls, eps, delta, constants);
  return report;
}

RunReport interleave_learn(World& world, const HypothesisClass& cls, double eps, double delta,
                           const FilterParams& params, const LearnerConstants& constants) {
  validate_target(eps, delta);
  params.validate();
  constants.validate();
  RunReport report;
  const double phase_delta = delta / 6.0;
  const LabelStep label = [&](std::span<const Instance> xs) -> std::optional<LabeledSample> {
    return correct_label(world, xs, phase_delta, params.alpha_assumed);
  };
  const PassPlan plan{eps, delta, phase_delta};
  report.hypothesis = *three_phases(world, cls, plan, label, params, constants, report);
  finish(report, world, cls, eps, delta, constants);
  return report;
}

RunReport robust_learn(World& world, const HypothesisClass& cls, double eps, double delta,
                       double alpha, const FilterParams& params,
                       const LearnerConstants& constants) {
  validate_target(eps, delta);
  params.validate();
  constants.validate();
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in (0,1]");
  const std::size_t envelope = restart_envelope(alpha);

  RunReport report;
  report.alpha_trace.push_back(alpha);
  double current = alpha;
  for (;;) {
    if (current > 0.75) {
      FilterParams strong = params;
      strong.alpha_assumed = current;
      RunReport inner = interleave_learn(world, cls, eps, delta, strong, constants);
      report.hypothesis = inner.hypothesis;
      report.h1_shortcut = inner.h1_shortcut;
      report.no_disagreement = inner.no_disagreement;
      report.timings.insert(report.timings.end(), inner.timings.begin(), inner.timings.end());
      break;
    }

    const double confidence = constants.delta_scale * current * delta;
    std::optional<double> pruned_to;
    const LabelStep label = [&](std::span<const Instance> xs) -> std::optional<LabeledSample> {
      auto outcome = prune_and_label(world, xs, confidence, current);
      if (auto* p = std::get_if<Pruned>(&outcome)) {
        pruned_to = p->new_alpha;
        return std::nullopt;
      }
      return std::move(std::get<Labeled>(outcome).sample);
    };

    // Phase 0: look for weak-majority test cases before any learning.
    PhaseClock clock(report.timings);
    const auto s0_size =
        static_cast<std::size_t>(std::ceil((1.0 / eps) * std::log(1.0 / confidence)));
    const auto s0 = world.draw_instances(s0_size);
    std::optional<Hypothesis> learned;
    if (label(s0)) {
      clock.lap("phase 0");
      const PassPlan plan{eps, confidence, confidence};
      learned = three_phases(world, cls, plan, label, params, constants, report);
    } else {
      clock.lap("phase 0");
    }
    if (learned) {
      report.hypothesis = *learned;
      break;
    }

    ++report.restarts;
    current = *pruned_to;
    report.alpha_trace.push_back(current);
    if (report.restarts > envelope) {
      throw RestartEnvelopeExceeded("robust learner restarted " + std::to_string(report.restarts) +
                                    " times; envelope is " + std::to_string(envelope));
    }
  }
  finish(report, world, cls, eps, delta, constants);
  return report;
}

}  // namespace crowdpac

#include "crowdpac/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "crowdpac/error.hpp"

namespace crowdpac {

DisjointSets::DisjointSets(std::size_t n) : parent_(n), rank_size_(n, 1), components_(n) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t DisjointSets::find(std::size_t v) {
  while (parent_[v] != v) {
    parent_[v] = parent_[parent_[v]];
    v = parent_[v];
  }
  return v;
}

bool DisjointSets::unite(std::size_t a, std::size_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (rank_size_[a] < rank_size_[b]) std::swap(a, b);
  parent_[b] = a;
  rank_size_[a] += rank_size_[b];
  --components_;
  return true;
}

void AgreementGraph::add_edge(std::size_t i, std::size_t j) {
  if (i >= n_ || j >= n_) throw InvalidArgument("edge endpoint out of range");
  edges_.emplace_back(std::min(i, j), std::max(i, j));
  sets_.unite(i, j);
}

std::vector<std::vector<std::size_t>> AgreementGraph::components() const {
  std::vector<std::vector<std::size_t>> by_root(n_);
  for (std::size_t v = 0; v < n_; ++v) by_root[sets_.find(v)].push_back(v);
  std::vector<std::vector<std::size_t>> out;
  for (auto& c : by_root) {
    if (!c.empty()) out.push_back(std::move(c));
  }
  // Vertices are pushed in increasing order, so each component is sorted.
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

std::vector<std::vector<std::size_t>> connected_components(const AgreementGraph& graph) {
  return graph.components();
}

// ---------------------------------------------------------------------------

std::optional<double> exact_disagreement(const Distribution& d, const Hypothesis& a,
                                         const Hypothesis& b) {
  if (std::holds_alternative<UniformUnit>(d)) return uniform_disagreement(a, b);
  if (const auto* w = std::get_if<WeightedPoints>(&d)) {
    double total = 0.0;
    double mass = 0.0;
    for (std::size_t k = 0; k < w->points.size(); ++k) {
      total += w->weights[k];
      if (a(w->points[k]) != b(w->points[k])) mass += w->weights[k];
    }
    return mass / total;
  }
  const auto& bits = std::get<UniformBits>(d);
  if (bits.width > 20) return std::nullopt;
  double mass = 0.0;
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << bits.width); ++v) {
    const Instance x = Instance::bits(v, bits.width);
    if (a(x) == b(x)) continue;
    const int ones = std::popcount(v);
    mass += std::pow(bits.p_one, ones) * std::pow(1.0 - bits.p_one, bits.width - ones);
  }
  return mass;
}

namespace {

Hypothesis function_of(const LabelerBehavior& b, const Hypothesis& target) {
  if (std::holds_alternative<Perfect>(b)) return target;
  if (const auto* f = std::get_if<FixedHypothesis>(&b)) return f->h;
  if (const auto* c = std::get_if<Colluder>(&b)) return c->h;
  throw InvalidArgument("detection pools hold fixed-function labelers only, got " + describe(b));
}

const FinitePool& finite_pool(const WorldSpec& spec) {
  const auto* fin = std::get_if<FinitePool>(&spec.pool.mode);
  if (fin == nullptr) throw InvalidArgument("detection needs a finite labeler pool");
  return *fin;
}

}  // namespace

DetectionWorld::DetectionWorld(WorldSpec spec, double eps, double delta)
    : world_(spec), eps_(eps), delta_(delta) {
  if (!(eps > 0.0 && eps < 0.25)) throw InvalidArgument("detection eps must lie in (0, 1/4)");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0,1)");
  const auto& fin = finite_pool(spec);
  // Exact errors are sums of float endpoints; absorb their rounding.
  const double slack = 1e-12;
  for (const auto& b : fin.labelers) {
    functions_.push_back(function_of(b, world_.target()));
    const auto err = exact_disagreement(world_.distribution(), functions_.back(), world_.target());
    if (!err) throw InvalidArgument("detection needs exactly computable labeler errors");
    if (*err > eps + slack && *err < 4.0 * eps - slack) {
      throw InvalidArgument("labeler " + std::to_string(errors_.size()) + " has error " +
                            std::to_string(*err) + " inside the forbidden band (eps, 4 eps)");
    }
    errors_.push_back(*err);
    good_.push_back(*err <= eps + slack);
  }
  const auto n = good_.size();
  const auto good = static_cast<std::size_t>(std::count(good_.begin(), good_.end(), true));
  if (good < n / 2 + 1) {
    throw InvalidArgument("need at least floor(n/2)+1 good labelers, have " + std::to_string(good) +
                          " of " + std::to_string(n));
  }
}

std::vector<std::size_t> DetectionWorld::good_set() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < good_.size(); ++i) {
    if (good_[i]) out.push_back(i);
  }
  return out;
}

double DetectionWorld::true_disagreement(std::size_t i, std::size_t j) const {
  return *exact_disagreement(world_.distribution(), functions_.at(i), functions_.at(j));
}

std::uint64_t disagreement_sample_size(std::size_t n, double eps, double delta) {
  if (n == 0) throw InvalidArgument("empty labeler pool");
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("eps must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0,1)");
  const double nn = static_cast<double>(n);
  return static_cast<std::uint64_t>(std::ceil((48.0 / eps) * std::log(8.0 * nn * nn / delta)));
}

double disagree(DetectionWorld& dw, std::size_t i, std::size_t j) {
  const std::size_t n = dw.size();
  if (i >= n || j >= n) throw InvalidArgument("labeler index out of range");
  if (i == j) throw InvalidArgument("disagreement test needs two distinct labelers");
  const std::uint64_t m = disagreement_sample_size(n, dw.eps(), dw.delta());
  auto& world = dw.world();
  auto& pool = world.pool();
  std::uint64_t differ = 0;
  for (std::uint64_t k = 0; k < m; ++k) {
    const Instance x = world.draw_instance();
    if (pool.query(i, x) != pool.query(j, x)) ++differ;
  }
  return static_cast<double>(differ) / static_cast<double>(m);
}

bool DetectionReport::estimates_accurate(double eps) const {
  return std::all_of(tests.begin(), tests.end(), [&](const DisagreementTest& t) {
    return std::abs(t.empirical - t.truth) < eps / 2.0;
  });
}

DetectionReport detect_good_labelers(DetectionWorld& dw) {
  const std::size_t n = dw.size();
  const double cut = 2.5 * dw.eps();
  DetectionReport report;
  report.sample_size = disagreement_sample_size(n, dw.eps(), dw.delta());
  AgreementGraph graph(n);
  report.component_trace.push_back(graph.component_count());

  auto test = [&](std::size_t i, std::size_t j) {
    const double d = disagree(dw, i, j);
    const bool edge = d < cut;
    report.tests.push_back({i, j, d, dw.true_disagreement(i, j), edge});
    if (edge) {
      graph.add_edge(i, j);
      report.component_trace.push_back(graph.component_count());
    }
  };

  // Step 1: ceil(16 ln2 n) uniform unordered pairs, with replacement.
  if (n >= 2) {
    const auto pairs = static_cast<std::size_t>(std::ceil(16.0 * std::log(2.0) * static_cast<double>(n)));
    auto& rng = dw.world().learner_rng();
    for (std::size_t q = 0; q < pairs; ++q) {
      const std::size_t i = rng.below(n);
      std::size_t j = rng.below(n - 1);
      if (j >= i) ++j;
      test(i, j);
    }
    report.pair_tests = pairs;
  }

  // Step 2: components holding at least a quarter of the vertices.
  const auto step1 = graph.components();
  std::vector<std::size_t> representatives;
  std::vector<bool> covered(n, false);
  for (const auto& c : step1) {
    report.largest_step1_component = std::max(report.largest_step1_component, c.size());
    if (4 * c.size() >= n) {
      representatives.push_back(c.front());
      for (std::size_t v : c) covered[v] = true;
    }
  }
  report.large_components = representatives.size();

  // Step 3: every uncovered vertex against each large component.
  for (std::size_t v = 0; v < n; ++v) {
    if (covered[v]) continue;
    for (std::size_t rep : representatives) {
      test(v, rep);
      ++report.step3_tests;
    }
  }

  // Largest component; ties go to the one with the smallest member.
  const auto final_components = graph.components();
  const auto best = std::max_element(
      final_components.begin(), final_components.end(),
      [](const auto& a, const auto& b) { return a.size() < b.size(); });
  report.selected = *best;
  report.metrics = ledger_report(dw.world().pool(), 1);
  return report;
}

}  // namespace crowdpac

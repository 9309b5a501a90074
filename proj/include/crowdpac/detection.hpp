#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "crowdpac/crowd.hpp"

namespace crowdpac {

/// Union-find with path halving and union by size.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n);

  std::size_t find(std::size_t v);
  /// Returns true if two components merged.
  bool unite(std::size_t a, std::size_t b);
  std::size_t component_count() const { return components_; }
  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> rank_size_;
  std::size_t components_;
};

/// Undirected graph over labelers; edges are only ever added.
class AgreementGraph {
 public:
  explicit AgreementGraph(std::size_t n) : sets_(n), n_(n) {}

  void add_edge(std::size_t i, std::size_t j);
  std::size_t vertex_count() const { return n_; }
  const std::vector<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }
  std::size_t component_count() const { return sets_.component_count(); }

  /// Components, each sorted, ordered by smallest member.
  std::vector<std::vector<std::size_t>> components() const;

 private:
  mutable DisjointSets sets_;
  std::size_t n_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
};

std::vector<std::vector<std::size_t>> connected_components(const AgreementGraph& graph);

/// A finite pool of fixed-function labelers split into good (error <= eps)
/// and bad (error >= 4 eps) against the target.
///
/// Construction computes every labeler's exact error and rejects pools with
/// an error in the band (eps, 4 eps), fewer than floor(n/2) + 1 good
/// labelers, or a distribution without exact disagreement masses.
class DetectionWorld {
 public:
  DetectionWorld(WorldSpec spec, double eps, double delta);

  std::size_t size() const { return good_.size(); }
  bool is_good(std::size_t i) const { return good_.at(i); }
  std::vector<std::size_t> good_set() const;
  double eps() const { return eps_; }
  double delta() const { return delta_; }
  /// Exact error of labeler i against the target.
  double true_error(std::size_t i) const { return errors_.at(i); }
  /// Exact Pr[l_i(x) != l_j(x)].
  double true_disagreement(std::size_t i, std::size_t j) const;

  World& world() { return world_; }
  const World& world() const { return world_; }
  const Hypothesis& labeler_function(std::size_t i) const { return functions_.at(i); }

 private:
  World world_;
  double eps_;
  double delta_;
  std::vector<Hypothesis> functions_;
  std::vector<double> errors_;
  std::vector<bool> good_;
};

/// Exact disagreement mass of two hypotheses under a distribution, when it is
/// computable (uniform on [0,1], finite point sets, or uniform bits of width <= 20).
std::optional<double> exact_disagreement(const Distribution& d, const Hypothesis& a,
                                         const Hypothesis& b);

/// ceil((48 / eps) ln(8 n^2 / delta)).
std::uint64_t disagreement_sample_size(std::size_t n, double eps, double delta);

/// Empirical disagreement of labelers i and j on a fresh sample; every
/// instance is charged to both.
double disagree(DetectionWorld& dw, std::size_t i, std::size_t j);

struct DisagreementTest {
  std::size_t i;
  std::size_t j;
  double empirical;
  double truth;
  bool edge;
};

struct DetectionReport {
  std::vector<std::size_t> selected;  // sorted
  std::size_t pair_tests = 0;         // step 1
  std::size_t step3_tests = 0;
  std::size_t largest_step1_component = 0;
  std::size_t large_components = 0;
  std::vector<std::size_t> component_trace;  // component count after every edge
  std::vector<DisagreementTest> tests;
  MetricsRecord metrics;
  std::uint64_t sample_size = 0;  // m_d

  /// Every test landed within eps/2 of its true disagreement.
  bool estimates_accurate(double eps) const;
};

/// Random pair tests, large-component collection, and a sweep of the
/// remaining vertices against one representative per large component.
/// Returns the largest component of the final graph.
DetectionReport detect_good_labelers(DetectionWorld& dw);

}  // namespace crowdpac

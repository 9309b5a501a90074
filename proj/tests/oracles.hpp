#pragma once

// Independent reference computations shared by unit and acceptance tests.

#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

struct FilterExact {
  double inclusion = 0.0;         // Pr[instance survives all N rounds]
  double expected_queries = 0.0;  // E[rounds used]
};

/// Exact law of the filter on one instance when each fresh labeler agrees
/// with h(x) independently with probability q: dynamic programming over the
/// running (agree - disagree) difference.
inline FilterExact filter_exact(double q, std::uint64_t rounds) {
  std::map<long, double> alive{{0, 1.0}};
  FilterExact out;
  for (std::uint64_t t = 1; t <= rounds; ++t) {
    double mass = 0.0;
    for (const auto& [d, p] : alive) mass += p;
    out.expected_queries += mass;
    std::map<long, double> next;
    for (const auto& [d, p] : alive) {
      next[d + 1] += p * q;
      next[d - 1] += p * (1.0 - q);
    }
    if (t % 2 == 1) {
      for (auto it = next.begin(); it != next.end();) {
        it = it->first > 0 ? next.erase(it) : std::next(it);
      }
    }
    alive = std::move(next);
  }
  for (const auto& [d, p] : alive) out.inclusion += p;
  return out;
}

/// Probability that a +-1 walk started at i, stepping up with probability p,
/// hits 0 before N + i. First-step analysis solved as a linear system.
inline double ruin_by_solve(double p, std::uint64_t N, std::uint64_t i) {
  const auto top = static_cast<Eigen::Index>(N + i);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(top + 1, top + 1);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(top + 1);
  A(0, 0) = 1.0;
  b(0) = 1.0;
  A(top, top) = 1.0;
  for (Eigen::Index s = 1; s < top; ++s) {
    A(s, s) = 1.0;
    A(s, s + 1) = -p;
    A(s, s - 1) = -(1.0 - p);
  }
  const Eigen::VectorXd u = A.partialPivLu().solve(b);
  return u(static_cast<Eigen::Index>(i));
}

/// Probability that the same walk, cut off after `horizon` steps, has hit 0.
inline double ruin_within(double p, std::uint64_t N, std::uint64_t i, std::uint64_t horizon) {
  const std::uint64_t top = N + i;
  std::vector<double> dist(top + 1, 0.0);
  dist[i] = 1.0;
  for (std::uint64_t t = 0; t < horizon; ++t) {
    std::vector<double> next(top + 1, 0.0);
    next[0] = dist[0];
    next[top] = dist[top];
    for (std::uint64_t s = 1; s < top; ++s) {
      next[s + 1] += dist[s] * p;
      next[s - 1] += dist[s] * (1.0 - p);
    }
    dist = std::move(next);
  }
  return dist[0];
}

}  // namespace oracle

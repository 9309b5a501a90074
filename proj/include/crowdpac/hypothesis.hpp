#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace crowdpac {

enum class Label : std::int8_t { negative = -1, positive = 1 };

constexpr Label operator-(Label y) noexcept {
  return y == Label::positive ? Label::negative : Label::positive;
}

constexpr int to_int(Label y) noexcept { return static_cast<int>(y); }

/// Instance space of a hypothesis: the unit interval or fixed-width bit vectors.
struct InstanceSpace {
  bool scalar = true;
  unsigned width = 0;  // bit width; zero for the unit interval

  static constexpr InstanceSpace unit_interval() { return {true, 0}; }
  static constexpr InstanceSpace bits(unsigned w) { return {false, w}; }

  friend bool operator==(const InstanceSpace&, const InstanceSpace&) = default;
  std::string describe() const;
};

struct BitVector {
  std::uint64_t bits = 0;
  unsigned width = 0;

  friend bool operator==(const BitVector&, const BitVector&) = default;
};

/// A point of the instance space. Identity is the exact value: two draws of the
/// same multiset element compare equal and share an identity.
class Instance {
 public:
  /// Throws InvalidArgument outside [0, 1].
  static Instance scalar(double x);
  /// Throws InvalidArgument for width 0, width > 64, or bits outside the width.
  static Instance bits(std::uint64_t bits, unsigned width);

  bool is_scalar() const { return std::holds_alternative<double>(value_); }
  double value() const { return std::get<double>(value_); }
  const BitVector& bit_vector() const { return std::get<BitVector>(value_); }
  InstanceSpace space() const;

  /// Stable 64-bit identity derived from the value.
  std::uint64_t identity() const;

  friend bool operator==(const Instance&, const Instance&) = default;

 private:
  explicit Instance(std::variant<double, BitVector> v) : value_(v) {}
  std::variant<double, BitVector> value_;
};

struct LabeledExample {
  Instance x;
  Label y;
};

/// Ordered multiset of labeled instances; duplicates are allowed.
using LabeledSample = std::vector<LabeledExample>;

/// An immutable ±1 classifier.
///
/// Besides the three learnable forms (threshold, interval, monotone
/// conjunction) a hypothesis may be a composite: a negation, a region flip
/// (the base label negated wherever a region hypothesis says +1), or the
/// pointwise majority of three children. Composites are needed for labeler
/// behaviors and for the boosted output; the consistency oracle only ever
/// returns the learnable forms. Copies share children.
class Hypothesis {
 public:
  enum class Form { threshold, interval, conjunction, negation, flip, majority };

  /// +1 iff x >= theta.
  static Hypothesis threshold(double theta);
  /// +1 iff lo <= x <= hi.
  static Hypothesis interval(double lo, double hi);
  /// Labels every instance -1.
  static Hypothesis empty_interval();
  /// +1 iff every bit of `mask` is set in x.
  static Hypothesis conjunction(std::uint64_t mask, unsigned width);
  static Hypothesis negation(Hypothesis h);
  /// base(x), negated where region(x) = +1. Both must share an instance space.
  static Hypothesis flip(Hypothesis base, Hypothesis region);
  /// Pointwise majority; throws InstanceSpaceMismatch if the spaces differ.
  static Hypothesis majority(Hypothesis h1, Hypothesis h2, Hypothesis h3);

  Form form() const;
  InstanceSpace space() const { return space_; }

  /// Parameters of the learnable forms (throw std::bad_variant_access otherwise).
  double theta() const;
  std::pair<double, double> bounds() const;
  bool is_empty_interval() const;
  std::uint64_t mask() const;

  /// Children of composite forms, in construction order (empty for learnable forms).
  std::vector<const Hypothesis*> children() const;

  /// Evaluation without the instance-space check; used on hot paths where the
  /// caller has already validated the space.
  Label operator()(const Instance& x) const;

  std::string describe() const;

 private:
  struct Threshold {
    double theta;
  };
  struct Interval {
    double lo;
    double hi;
    bool empty;
  };
  struct Conjunction {
    std::uint64_t mask;
  };
  struct Negated {
    std::shared_ptr<const Hypothesis> child;
  };
  struct Flipped {
    std::shared_ptr<const Hypothesis> base;
    std::shared_ptr<const Hypothesis> region;
  };
  struct Majority {
    std::array<std::shared_ptr<const Hypothesis>, 3> children;
  };
  using Repr = std::variant<Threshold, Interval, Conjunction, Negated, Flipped, Majority>;

  Hypothesis(Repr repr, InstanceSpace space) : repr_(std::move(repr)), space_(space) {}

  Repr repr_;
  InstanceSpace space_;
};

/// Deterministic evaluation; throws InstanceSpaceMismatch if x is not in h's space.
Label evaluate(const Hypothesis& h, const Instance& x);

/// Pointwise majority of three hypotheses over one instance space.
Hypothesis combine_majority3(const Hypothesis& h1, const Hypothesis& h2, const Hypothesis& h3);

/// One of the shipped learnable classes.
struct HypothesisClass {
  enum class Kind { threshold, interval, conjunction };

  Kind kind = Kind::threshold;
  unsigned bits = 0;  // conjunction width

  static HypothesisClass thresholds() { return {Kind::threshold, 0}; }
  static HypothesisClass intervals() { return {Kind::interval, 0}; }
  static HypothesisClass conjunctions(unsigned width);

  unsigned vc_dimension() const;
  InstanceSpace space() const;
  /// Canonical output of the oracle on an empty sample.
  Hypothesis default_hypothesis() const;
  std::string name() const;
};

/// Consistency oracle: a hypothesis of the class with zero error on `sample`,
/// or nullopt when none exists.
///
/// Canonical choices: thresholds take the midpoint between the largest
/// negative and smallest positive instance; intervals the tightest interval
/// around the positives; conjunctions the largest mask satisfied by all
/// positives. Throws InstanceSpaceMismatch on foreign instances.
std::optional<Hypothesis> consistent_hypothesis(const HypothesisClass& cls,
                                                std::span<const LabeledExample> sample);

/// Number of mistakes of h on a labeled sample.
std::size_t count_mistakes(const Hypothesis& h, std::span<const LabeledExample> sample);

/// ceil((C / eps) * (d * ln(e / eps) + ln(1 / delta))).
std::uint64_t sample_complexity(unsigned vc_dimension, double eps, double delta, double C = 1.0);
std::uint64_t sample_complexity(const HypothesisClass& cls, double eps, double delta,
                                double C = 1.0);

// Exact geometry on the unit interval.
//
// Every scalar hypothesis is piecewise constant with finitely many
// breakpoints, so measures of sets built from their outputs are sums of
// segment lengths.

/// Sorted, deduplicated breakpoints of h inside (0, 1).
std::vector<double> breakpoints(const Hypothesis& h);

/// Lebesgue measure of {x in [0,1] : pred(x)}, where pred depends on x only
/// through the listed hypotheses.
double uniform_measure(std::span<const Hypothesis* const> involved,
                       const std::function<bool(const Instance&)>& pred);

/// Uniform-[0,1] mass of {x : a(x) != b(x)}.
double uniform_disagreement(const Hypothesis& a, const Hypothesis& b);

}  // namespace crowdpac

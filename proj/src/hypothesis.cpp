#include "crowdpac/hypothesis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "crowdpac/error.hpp"
#include "crowdpac/random.hpp"

namespace crowdpac {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

std::uint64_t width_mask(unsigned width) {
  return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
}

void require_space(const Hypothesis& h, const Instance& x) {
  if (!(h.space() == x.space())) {
    throw InstanceSpaceMismatch("instance in " + x.space().describe() +
                                " given to hypothesis over " + h.space().describe());
  }
}

}  // namespace

std::string InstanceSpace::describe() const {
  return scalar ? std::string("[0,1]") : "{0,1}^" + std::to_string(width);
}

Instance Instance::scalar(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw InvalidArgument("scalar instance outside [0,1]: " + std::to_string(x));
  }
  return Instance(x);
}

Instance Instance::bits(std::uint64_t bits, unsigned width) {
  if (width == 0 || width > 64) throw InvalidArgument("bit width must be in [1,64]");
  if ((bits & ~width_mask(width)) != 0) throw InvalidArgument("bits set beyond declared width");
  return Instance(BitVector{bits, width});
}

InstanceSpace Instance::space() const {
  return is_scalar() ? InstanceSpace::unit_interval() : InstanceSpace::bits(bit_vector().width);
}

std::uint64_t Instance::identity() const {
  if (is_scalar()) return splitmix64(std::bit_cast<std::uint64_t>(value() + 0.0));
  const auto& b = bit_vector();
  return splitmix64(b.bits ^ (std::uint64_t{b.width} << 56) ^ 0x5bd1e995ULL);
}

// ---------------------------------------------------------------------------

Hypothesis Hypothesis::threshold(double theta) {
  if (std::isnan(theta)) throw InvalidArgument("threshold is NaN");
  return Hypothesis(Threshold{theta}, InstanceSpace::unit_interval());
}

Hypothesis Hypothesis::interval(double lo, double hi) {
  if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
    throw InvalidArgument("interval needs lo <= hi");
  }
  return Hypothesis(Interval{lo, hi, false}, InstanceSpace::unit_interval());
}

Hypothesis Hypothesis::empty_interval() {
  return Hypothesis(Interval{0.0, 0.0, true}, InstanceSpace::unit_interval());
}

Hypothesis Hypothesis::conjunction(std::uint64_t mask, unsigned width) {
  if (width == 0 || width > 64) throw InvalidArgument("bit width must be in [1,64]");
  if ((mask & ~width_mask(width)) != 0) throw InvalidArgument("mask bits beyond declared width");
  return Hypothesis(Conjunction{mask}, InstanceSpace::bits(width));
}

Hypothesis Hypothesis::negation(Hypothesis h) {
  const auto space = h.space();
  return Hypothesis(Negated{std::make_shared<const Hypothesis>(std::move(h))}, space);
}

Hypothesis Hypothesis::flip(Hypothesis base, Hypothesis region) {
  if (!(base.space() == region.space())) {
    throw InstanceSpaceMismatch("flip region over a different instance space");
  }
  const auto space = base.space();
  return Hypothesis(Flipped{std::make_shared<const Hypothesis>(std::move(base)),
                            std::make_shared<const Hypothesis>(std::move(region))},
                    space);
}

Hypothesis Hypothesis::majority(Hypothesis h1, Hypothesis h2, Hypothesis h3) {
  if (!(h1.space() == h2.space()) || !(h1.space() == h3.space())) {
    throw InstanceSpaceMismatch("majority over hypotheses with different instance spaces");
  }
  const auto space = h1.space();
  return Hypothesis(Majority{{std::make_shared<const Hypothesis>(std::move(h1)),
                              std::make_shared<const Hypothesis>(std::move(h2)),
                              std::make_shared<const Hypothesis>(std::move(h3))}},
                    space);
}

Hypothesis::Form Hypothesis::form() const {
  return std::visit(Overloaded{
                        [](const Threshold&) { return Form::threshold; },
                        [](const Interval&) { return Form::interval; },
                        [](const Conjunction&) { return Form::conjunction; },
                        [](const Negated&) { return Form::negation; },
                        [](const Flipped&) { return Form::flip; },
                        [](const Majority&) { return Form::majority; },
                    },
                    repr_);
}

double Hypothesis::theta() const { return std::get<Threshold>(repr_).theta; }

std::pair<double, double> Hypothesis::bounds() const {
  const auto& iv = std::get<Interval>(repr_);
  return {iv.lo, iv.hi};
}

bool Hypothesis::is_empty_interval() const { return std::get<Interval>(repr_).empty; }

std::uint64_t Hypothesis::mask() const { return std::get<Conjunction>(repr_).mask; }

std::vector<const Hypothesis*> Hypothesis::children() const {
  return std::visit(Overloaded{
                        [](const Negated& n) { return std::vector<const Hypothesis*>{n.child.get()}; },
                        [](const Flipped& f) {
                          return std::vector<const Hypothesis*>{f.base.get(), f.region.get()};
                        },
                        [](const Majority& m) {
                          return std::vector<const Hypothesis*>{
                              m.children[0].get(), m.children[1].get(), m.children[2].get()};
                        },
                        [](const auto&) { return std::vector<const Hypothesis*>{}; },
                    },
                    repr_);
}

Label Hypothesis::operator()(const Instance& x) const {
  return std::visit(
      Overloaded{
          [&](const Threshold& t) { return x.value() >= t.theta ? Label::positive : Label::negative; },
          [&](const Interval& iv) {
            const double v = x.value();
            return !iv.empty && iv.lo <= v && v <= iv.hi ? Label::positive : Label::negative;
          },
          [&](const Conjunction& c) {
            return (x.bit_vector().bits & c.mask) == c.mask ? Label::positive : Label::negative;
          },
          [&](const Negated& n) { return -(*n.child)(x); },
          [&](const Flipped& f) {
            const Label base = (*f.base)(x);
            return (*f.region)(x) == Label::positive ? -base : base;
          },
          [&](const Majority& m) {
            const int sum = to_int((*m.children[0])(x)) + to_int((*m.children[1])(x)) +
                            to_int((*m.children[2])(x));
            return sum > 0 ? Label::positive : Label::negative;
          },
      },
      repr_);
}

std::string Hypothesis::describe() const {
  std::ostringstream out;
  out.precision(17);
  std::visit(Overloaded{
                 [&](const Threshold& t) { out << "threshold(" << t.theta << ")"; },
                 [&](const Interval& iv) {
                   if (iv.empty) {
                     out << "interval(empty)";
                   } else {
                     out << "interval(" << iv.lo << "," << iv.hi << ")";
                   }
                 },
                 [&](const Conjunction& c) { out << "conjunction(0x" << std::hex << c.mask << ")"; },
                 [&](const Negated& n) { out << "not(" << n.child->describe() << ")"; },
                 [&](const Flipped& f) {
                   out << "flip(" << f.base->describe() << "," << f.region->describe() << ")";
                 },
                 [&](const Majority& m) {
                   out << "maj(" << m.children[0]->describe() << "," << m.children[1]->describe()
                       << "," << m.children[2]->describe() << ")";
                 },
             },
             repr_);
  return out.str();
}

Label evaluate(const Hypothesis& h, const Instance& x) {
  require_space(h, x);
  return h(x);
}

Hypothesis combine_majority3(const Hypothesis& h1, const Hypothesis& h2, const Hypothesis& h3) {
  return Hypothesis::majority(h1, h2, h3);
}

// ---------------------------------------------------------------------------

HypothesisClass HypothesisClass::conjunctions(unsigned width) {
  if (width == 0 || width > 64) throw InvalidArgument("conjunction width must be in [1,64]");
  return {Kind::conjunction, width};
}

unsigned HypothesisClass::vc_dimension() const {
  switch (kind) {
    case Kind::threshold:
      return 1;
    case Kind::interval:
      return 2;
    case Kind::conjunction:
      return bits;
  }
  return 0;
}

InstanceSpace HypothesisClass::space() const {
  return kind == Kind::conjunction ? InstanceSpace::bits(bits) : InstanceSpace::unit_interval();
}

Hypothesis HypothesisClass::default_hypothesis() const {
  switch (kind) {
    case Kind::threshold:
      return Hypothesis::threshold(0.5);
    case Kind::interval:
      return Hypothesis::empty_interval();
    case Kind::conjunction:
      return Hypothesis::conjunction(width_mask(bits), bits);
  }
  return Hypothesis::threshold(0.5);
}

std::string HypothesisClass::name() const {
  switch (kind) {
    case Kind::threshold:
      return "threshold";
    case Kind::interval:
      return "interval";
    case Kind::conjunction:
      return "conjunction";
  }
  return "?";
}

namespace {

std::optional<Hypothesis> consistent_threshold(std::span<const LabeledExample> sample) {
  double max_neg = -std::numeric_limits<double>::infinity();
  double min_pos = std::numeric_limits<double>::infinity();
  for (const auto& [x, y] : sample) {
    if (y == Label::positive) {
      min_pos = std::min(min_pos, x.value());
    } else {
      max_neg = std::max(max_neg, x.value());
    }
  }
  const bool any_pos = std::isfinite(min_pos);
  const bool any_neg = std::isfinite(max_neg);
  if (any_pos && any_neg && !(max_neg < min_pos)) return std::nullopt;

  double theta = 0.5;
  if (any_pos && any_neg) {
    theta = 0.5 * (max_neg + min_pos);
    if (theta <= max_neg) theta = min_pos;  // adjacent doubles
  } else if (any_pos) {
    theta = 0.5 * min_pos;
  } else if (any_neg) {
    theta = 0.5 * (max_neg + 1.0);
    if (theta <= max_neg) theta = std::nextafter(max_neg, 2.0);
  }
  return Hypothesis::threshold(theta);
}

std::optional<Hypothesis> consistent_interval(std::span<const LabeledExample> sample) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& [x, y] : sample) {
    if (y == Label::positive) {
      lo = std::min(lo, x.value());
      hi = std::max(hi, x.value());
    }
  }
  if (!std::isfinite(lo)) return Hypothesis::empty_interval();
  for (const auto& [x, y] : sample) {
    if (y == Label::negative && lo <= x.value() && x.value() <= hi) return std::nullopt;
  }
  return Hypothesis::interval(lo, hi);
}

std::optional<Hypothesis> consistent_conjunction(unsigned width,
                                                 std::span<const LabeledExample> sample) {
  std::uint64_t mask = width_mask(width);
  for (const auto& [x, y] : sample) {
    if (y == Label::positive) mask &= x.bit_vector().bits;
  }
  auto h = Hypothesis::conjunction(mask, width);
  for (const auto& [x, y] : sample) {
    if (y == Label::negative && h(x) == Label::positive) return std::nullopt;
  }
  return h;
}

}  // namespace

std::optional<Hypothesis> consistent_hypothesis(const HypothesisClass& cls,
                                                std::span<const LabeledExample> sample) {
  const auto space = cls.space();
  for (const auto& ex : sample) {
    if (!(ex.x.space() == space)) {
      throw InstanceSpaceMismatch("sample instance in " + ex.x.space().describe() + " for " +
                                  cls.name() + " class over " + space.describe());
    }
  }
  if (sample.empty()) return cls.default_hypothesis();
  switch (cls.kind) {
    case HypothesisClass::Kind::threshold:
      return consistent_threshold(sample);
    case HypothesisClass::Kind::interval:
      return consistent_interval(sample);
    case HypothesisClass::Kind::conjunction:
      return consistent_conjunction(cls.bits, sample);
  }
  return std::nullopt;
}

std::size_t count_mistakes(const Hypothesis& h, std::span<const LabeledExample> sample) {
  return static_cast<std::size_t>(std::count_if(
      sample.begin(), sample.end(), [&](const LabeledExample& ex) { return evaluate(h, ex.x) != ex.y; }));
}

std::uint64_t sample_complexity(unsigned vc_dimension, double eps, double delta, double C) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("eps must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0,1)");
  if (!(C > 0.0)) throw InvalidArgument("sample-complexity constant must be positive");
  if (vc_dimension == 0) throw InvalidArgument("VC dimension must be positive");
  const double value =
      (C / eps) * (vc_dimension * std::log(std::exp(1.0) / eps) + std::log(1.0 / delta));
  return static_cast<std::uint64_t>(std::ceil(value));
}

std::uint64_t sample_complexity(const HypothesisClass& cls, double eps, double delta, double C) {
  return sample_complexity(cls.vc_dimension(), eps, delta, C);
}

// ---------------------------------------------------------------------------

namespace {

void collect_breakpoints(const Hypothesis& h, std::vector<double>& out) {
  switch (h.form()) {
    case Hypothesis::Form::threshold:
      out.push_back(h.theta());
      break;
    case Hypothesis::Form::interval:
      if (!h.is_empty_interval()) {
        out.push_back(h.bounds().first);
        out.push_back(h.bounds().second);
      }
      break;
    case Hypothesis::Form::conjunction:
      throw InstanceSpaceMismatch("breakpoints are defined for unit-interval hypotheses only");
    default:
      for (const Hypothesis* child : h.children()) collect_breakpoints(*child, out);
  }
}

}  // namespace

std::vector<double> breakpoints(const Hypothesis& h) {
  std::vector<double> raw;
  collect_breakpoints(h, raw);
  std::vector<double> out;
  for (double b : raw) {
    if (b > 0.0 && b < 1.0) out.push_back(b);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double uniform_measure(std::span<const Hypothesis* const> involved,
                       const std::function<bool(const Instance&)>& pred) {
  std::vector<double> cuts{0.0, 1.0};
  for (const Hypothesis* h : involved) {
    if (!h->space().scalar) throw InstanceSpaceMismatch("uniform measure needs [0,1] hypotheses");
    const auto b = breakpoints(*h);
    cuts.insert(cuts.end(), b.begin(), b.end());
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  // Labels are constant on each open segment; breakpoints themselves have measure zero.
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    if (pred(Instance::scalar(mid))) mass += cuts[i + 1] - cuts[i];
  }
  return mass;
}

double uniform_disagreement(const Hypothesis& a, const Hypothesis& b) {
  const std::array<const Hypothesis*, 2> involved{&a, &b};
  return uniform_measure(involved, [&](const Instance& x) { return a(x) != b(x); });
}

}  // namespace crowdpac

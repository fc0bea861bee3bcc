#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

/**
 * @file stl.hpp
 * @brief Signal Temporal Logic formulas over sampled vehicle states and their
 * exact (min/max) robustness semantics.
 *
 * Time is discrete: an interval [lo, hi] in seconds is mapped onto the uniform
 * sample grid of the trace, and no interpolation happens between samples.
 */

namespace ergoplan::stl {

/// Number of entries per sample: p1, p2, p3, v1, v2, v3.
inline constexpr std::size_t kStateDim = 6;

using StateVec = std::array<double, kStateDim>;
using Vec3     = std::array<double, 3>;

struct Interval {
  double lo = 0.0; ///< seconds
  double hi = 0.0; ///< seconds

  /// Validating constructor; throws InvalidArgument unless 0 <= lo <= hi, both finite.
  static auto make(double lo, double hi) -> Interval;

  friend auto operator==(const Interval&, const Interval&) -> bool = default;
};

/// Uniformly sampled state signal. Sample k is taken at t0 + k * dt.
class TimedTrace {
 public:
  TimedTrace(double t0, double dt, std::vector<StateVec> samples);

  [[nodiscard]] auto t0() const noexcept -> double { return t0_; }
  [[nodiscard]] auto dt() const noexcept -> double { return dt_; }
  [[nodiscard]] auto size() const noexcept -> std::size_t { return samples_.size(); }
  /// Index of the last sample (N).
  [[nodiscard]] auto last_index() const noexcept -> std::size_t { return samples_.size() - 1; }
  [[nodiscard]] auto time(std::size_t k) const noexcept -> double {
    return t0_ + static_cast<double>(k) * dt_;
  }
  [[nodiscard]] auto operator[](std::size_t k) const -> const StateVec& { return samples_[k]; }
  [[nodiscard]] auto samples() const noexcept -> std::span<const StateVec> { return samples_; }

 private:
  double t0_;
  double dt_;
  std::vector<StateVec> samples_;
};

/// mu(x) = coeffs . x + offset
struct AffinePredicate {
  StateVec coeffs{};
  double offset = 0.0;
  std::string label;

  static auto make(const StateVec& coeffs, double offset, std::string label = {}) -> AffinePredicate;

  [[nodiscard]] auto eval(const StateVec& x) const noexcept -> double {
    double acc = offset;
    for (std::size_t i = 0; i < kStateDim; ++i) { acc += coeffs[i] * x[i]; }
    return acc;
  }
};

/// Axis-aligned box in position space.
struct Box3 {
  Vec3 lo{};
  Vec3 hi{};

  /// Throws InvalidArgument unless lo[j] < hi[j] on every axis.
  static auto make(const Vec3& lo, const Vec3& hi) -> Box3;

  [[nodiscard]] auto center() const noexcept -> Vec3 {
    return {0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]), 0.5 * (lo[2] + hi[2])};
  }
  [[nodiscard]] auto contains(const Vec3& p) const noexcept -> bool {
    for (std::size_t j = 0; j < 3; ++j) {
      if (p[j] <= lo[j] || p[j] >= hi[j]) { return false; }
    }
    return true;
  }
  [[nodiscard]] auto inside(const Box3& outer) const noexcept -> bool {
    for (std::size_t j = 0; j < 3; ++j) {
      if (lo[j] < outer.lo[j] || hi[j] > outer.hi[j]) { return false; }
    }
    return true;
  }
  /// True when the interiors intersect.
  [[nodiscard]] auto overlaps(const Box3& other) const noexcept -> bool {
    for (std::size_t j = 0; j < 3; ++j) {
      if (hi[j] <= other.lo[j] || other.hi[j] <= lo[j]) { return false; }
    }
    return true;
  }

  friend auto operator==(const Box3&, const Box3&) -> bool = default;
};

enum class Op { Pred, Not, And, Or, Always, Eventually, Until };

struct Node;
/// Formulas are immutable trees shared by pointer.
using Formula = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::Pred;
  AffinePredicate pred;           ///< Pred only
  Interval interval;              ///< Always / Eventually / Until
  std::vector<Formula> children;  ///< Not: 1, And/Or: >= 1, Always/Eventually: 1, Until: 2 (lhs, rhs)
};

[[nodiscard]] auto predicate(AffinePredicate mu) -> Formula;
[[nodiscard]] auto negation(Formula f) -> Formula;
[[nodiscard]] auto conjunction(std::vector<Formula> fs) -> Formula;
[[nodiscard]] auto disjunction(std::vector<Formula> fs) -> Formula;
[[nodiscard]] auto always(Interval i, Formula f) -> Formula;
[[nodiscard]] auto eventually(Interval i, Formula f) -> Formula;
[[nodiscard]] auto until(Interval i, Formula lhs, Formula rhs) -> Formula;

/// Number of nodes in the tree (shared subtrees counted once per occurrence).
[[nodiscard]] auto node_count(const Formula& f) -> std::size_t;
/// Structural equality.
[[nodiscard]] auto same_structure(const Formula& a, const Formula& b) -> bool;
/// Compact textual rendering, mainly for diagnostics.
[[nodiscard]] auto to_string(const Formula& f) -> std::string;

/// Inclusive index range [first, last].
struct IndexRange {
  std::size_t first = 0;
  std::size_t last  = 0;

  [[nodiscard]] auto size() const noexcept -> std::size_t { return last - first + 1; }
  friend auto operator==(const IndexRange&, const IndexRange&) -> bool = default;
};

/// Grid offsets [klo, khi] such that window(t) = [t + klo, t + khi] before clipping.
struct WindowOffsets {
  std::size_t lo = 0;
  std::size_t hi = 0;
};

/// Maps an interval onto the sample grid. Throws EmptyWindow when no grid point
/// falls inside it.
[[nodiscard]] auto window_offsets(double dt, const Interval& i) -> WindowOffsets;

/// All k' with t0 + k' dt in [t_k + lo, t_k + hi], clipped to the trace.
/// Throws EmptyWindow when that set is empty.
[[nodiscard]] auto window_indices(const TimedTrace& trace, std::size_t t_index, const Interval& i)
    -> IndexRange;

[[nodiscard]] auto eval_robustness(const Formula& f, const TimedTrace& trace, std::size_t t_index)
    -> double;

/// Satisfied iff robustness is strictly positive.
[[nodiscard]] auto eval_bool(const Formula& f, const TimedTrace& trace, std::size_t t_index) -> bool;

/// Position inside the open box: And of (hi_j - p_j) and (p_j - lo_j).
[[nodiscard]] auto box_contains(const Box3& box, const std::string& label = {}) -> Formula;
/// Negation of box_contains.
[[nodiscard]] auto box_avoids(const Box3& box, const std::string& label = {}) -> Formula;

} // namespace ergoplan::stl

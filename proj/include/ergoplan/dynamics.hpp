#pragma once

#include "ergoplan/stl.hpp"

#include <vector>

// Per-axis double integrator with zero-order-hold acceleration input.

namespace ergoplan::dynamics {

using stl::Vec3;

struct KinematicLimits {
  Vec3 v_max{}; ///< m/s, symmetric per axis
  Vec3 a_max{}; ///< m/s^2, symmetric per axis

  static auto make(const Vec3& v_max, const Vec3& a_max) -> KinematicLimits;
  friend auto operator==(const KinematicLimits&, const KinematicLimits&) -> bool = default;
};

struct State {
  Vec3 p{};
  Vec3 v{};

  [[nodiscard]] auto as_sample() const -> stl::StateVec { return {p[0], p[1], p[2], v[0], v[1], v[2]}; }
  static auto from_sample(const stl::StateVec& s) -> State {
    return {{s[0], s[1], s[2]}, {s[3], s[4], s[5]}};
  }
};

using ControlSeq = std::vector<Vec3>;

struct Trajectory {
  stl::TimedTrace trace;
  ControlSeq controls; ///< controls[k] is held over [t_k, t_{k+1})
};

/// p' = p + v dt + a dt^2 / 2, v' = v + a dt.
[[nodiscard]] auto step(const State& s, const Vec3& a, double dt) -> State;

[[nodiscard]] auto rollout(const State& x0, const ControlSeq& u, double t0, double dt) -> Trajectory;

/// Minimum rest-to-rest time over `dist` under speed and acceleration caps
/// (trapezoidal when the cruise speed is reached, triangular otherwise).
[[nodiscard]] auto rest_to_rest_duration(double dist, double v_max, double a_max) -> double;

/// Bang-coast-bang acceleration sequence on the dt grid moving from p0 to p1
/// along the straight line, starting and ending at rest.
[[nodiscard]] auto rest_to_rest_controls(const Vec3& p0, const Vec3& p1, const KinematicLimits& limits,
                                         double dt) -> ControlSeq;

/// rest_to_rest_controls rolled out from p0 at rest, t0 = 0.
[[nodiscard]] auto rest_to_rest_segment(const Vec3& p0, const Vec3& p1, const KinematicLimits& limits,
                                        double dt) -> Trajectory;

/// Control sequence recovered from a trace: a_k = (v_{k+1} - v_k) / dt.
[[nodiscard]] auto controls_from_trace(const stl::TimedTrace& trace) -> ControlSeq;

} // namespace ergoplan::dynamics

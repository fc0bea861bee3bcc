#include "ergoplan/dynamics.hpp"

#include "ergoplan/error.hpp"

#include <cmath>
#include <limits>

namespace ergoplan::dynamics {

namespace {

constexpr double kRelSlack = 1e-12;

auto norm(const Vec3& d) -> double { return std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]); }

void require_positive_dt(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) { throw Error(ErrorCode::InvalidArgument, "dt must be positive"); }
}

} // namespace

auto KinematicLimits::make(const Vec3& v_max, const Vec3& a_max) -> KinematicLimits {
  for (std::size_t j = 0; j < 3; ++j) {
    if (!(v_max[j] > 0.0) || !(a_max[j] > 0.0) || !std::isfinite(v_max[j]) || !std::isfinite(a_max[j])) {
      throw Error(ErrorCode::InvalidArgument, "kinematic limits must be finite and strictly positive");
    }
  }
  return {v_max, a_max};
}

auto step(const State& s, const Vec3& a, double dt) -> State {
  require_positive_dt(dt);
  State out;
  const double half_dt2 = 0.5 * dt * dt;
  for (std::size_t j = 0; j < 3; ++j) {
    out.p[j] = s.p[j] + s.v[j] * dt + a[j] * half_dt2;
    out.v[j] = s.v[j] + a[j] * dt;
  }
  return out;
}

auto rollout(const State& x0, const ControlSeq& u, double t0, double dt) -> Trajectory {
  require_positive_dt(dt);
  std::vector<stl::StateVec> samples;
  samples.reserve(u.size() + 1);
  State s = x0;
  samples.push_back(s.as_sample());
  for (const auto& a : u) {
    s = step(s, a, dt);
    samples.push_back(s.as_sample());
  }
  return Trajectory{stl::TimedTrace(t0, dt, std::move(samples)), u};
}

auto rest_to_rest_duration(double dist, double v_max, double a_max) -> double {
  if (!(v_max > 0.0) || !(a_max > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "rest_to_rest_duration needs positive limits");
  }
  if (dist < 0.0) { throw Error(ErrorCode::InvalidArgument, "negative distance"); }
  if (dist >= v_max * v_max / a_max) { return dist / v_max + v_max / a_max; }
  return 2.0 * std::sqrt(dist / a_max);
}

auto rest_to_rest_controls(const Vec3& p0, const Vec3& p1, const KinematicLimits& limits, double dt)
    -> ControlSeq {
  require_positive_dt(dt);
  const Vec3 delta{p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2]};
  const double dist = norm(delta);
  if (dist == 0.0) { return {}; }

  // Limits along the line: the most constrained axis dominates.
  Vec3 dir{};
  double v_line = std::numeric_limits<double>::infinity();
  double a_line = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < 3; ++j) {
    dir[j] = delta[j] / dist;
    if (dir[j] != 0.0) {
      v_line = std::min(v_line, limits.v_max[j] / std::abs(dir[j]));
      a_line = std::min(a_line, limits.a_max[j] / std::abs(dir[j]));
    }
  }

  // n1 steps at +a, n2 coasting, n1 at -a covers a dt^2 n1 (n1 + n2); the
  // smallest step count admitting a feasible split wins.
  const double t_min = rest_to_rest_duration(dist, v_line, a_line);
  auto n             = static_cast<std::size_t>(std::max(2.0, std::ceil(t_min / dt - 1e-9)));
  for (;; ++n) {
    double best_score = std::numeric_limits<double>::infinity();
    std::size_t best_n1 = 0;
    for (std::size_t n1 = 1; 2 * n1 <= n; ++n1) {
      const auto m      = static_cast<double>(n - n1); // n1 + n2
      const double acc  = dist / (dt * dt * static_cast<double>(n1) * m);
      const double peak = dist / (dt * m);
      const double score = std::max(acc / a_line, peak / v_line);
      if (score <= 1.0 + kRelSlack && score < best_score) {
        best_score = score;
        best_n1    = n1;
      }
    }
    if (best_n1 == 0) { continue; }
    const std::size_t n1 = best_n1;
    const double acc     = dist / (dt * dt * static_cast<double>(n1) * static_cast<double>(n - n1));
    const Vec3 up{acc * dir[0], acc * dir[1], acc * dir[2]};
    const Vec3 down{-up[0], -up[1], -up[2]};
    ControlSeq u;
    u.reserve(n);
    u.insert(u.end(), n1, up);
    u.insert(u.end(), n - 2 * n1, Vec3{0.0, 0.0, 0.0});
    u.insert(u.end(), n1, down);
    return u;
  }
}

auto rest_to_rest_segment(const Vec3& p0, const Vec3& p1, const KinematicLimits& limits, double dt)
    -> Trajectory {
  return rollout(State{p0, {0.0, 0.0, 0.0}}, rest_to_rest_controls(p0, p1, limits, dt), 0.0, dt);
}

auto controls_from_trace(const stl::TimedTrace& trace) -> ControlSeq {
  ControlSeq u;
  u.reserve(trace.size() - 1);
  for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
    const auto& a = trace[k];
    const auto& b = trace[k + 1];
    u.push_back({(b[3] - a[3]) / trace.dt(), (b[4] - a[4]) / trace.dt(), (b[5] - a[5]) / trace.dt()});
  }
  return u;
}

} // namespace ergoplan::dynamics

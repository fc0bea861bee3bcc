#include "ergoplan/dynamics.hpp"
#include "ergoplan/error.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace ergoplan;
using namespace ergoplan::dynamics;
using Catch::Matchers::WithinAbs;

namespace {

auto default_limits() -> KinematicLimits { return KinematicLimits::make({1.1, 1.1, 1.1}, {1.1, 1.1, 1.1}); }

auto distance_to_line(const Vec3& p, const Vec3& a, const Vec3& b) -> double {
  Vec3 d{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  Vec3 w{p[0] - a[0], p[1] - a[1], p[2] - a[2]};
  const double dd = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
  const double s  = (w[0] * d[0] + w[1] * d[1] + w[2] * d[2]) / dd;
  double acc      = 0.0;
  for (std::size_t j = 0; j < 3; ++j) { acc += (w[j] - s * d[j]) * (w[j] - s * d[j]); }
  return std::sqrt(acc);
}

} // namespace

TEST_CASE("single steps") {
  const auto rest = step(State{}, {0, 0, 0}, 1.0);
  CHECK(rest.p == Vec3{0, 0, 0});
  CHECK(rest.v == Vec3{0, 0, 0});

  const auto coast = step(State{{0, 0, 0}, {1, 0, 0}}, {0, 0, 0}, 2.0);
  CHECK(coast.p[0] == 2.0);
  CHECK(coast.v[0] == 1.0);

  const auto push = step(State{}, {1, 0, 0}, 0.05);
  CHECK_THAT(push.p[0], WithinAbs(0.00125, 1e-15));
  CHECK_THAT(push.v[0], WithinAbs(0.05, 1e-15));
}

TEST_CASE("rollout by hand integration") {
  const auto tr = rollout(State{}, {{1, 0, 0}, {-1, 0, 0}}, 0.0, 1.0);
  REQUIRE(tr.trace.size() == 3);
  CHECK(tr.trace[1][0] == 0.5);
  CHECK(tr.trace[1][3] == 1.0);
  CHECK(tr.trace[2][0] == 1.0);
  CHECK(tr.trace[2][3] == 0.0);

  const auto still = rollout(State{{1, 2, 3}, {0, 0, 0}}, ControlSeq(5, Vec3{0, 0, 0}), 0.0, 0.1);
  for (const auto& s : still.trace.samples()) { CHECK(s == stl::StateVec{1, 2, 3, 0, 0, 0}); }
}

TEST_CASE("zero-order hold is exact under substepping") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-2, 2);
  for (int i = 0; i < 100; ++i) {
    const State s{{d(rng), d(rng), d(rng)}, {d(rng), d(rng), d(rng)}};
    const Vec3 a{d(rng), d(rng), d(rng)};
    const auto once = step(s, a, 0.4);
    State many      = s;
    for (int k = 0; k < 8; ++k) { many = step(many, a, 0.05); }
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK_THAT(many.p[j], WithinAbs(once.p[j], 1e-12));
      CHECK_THAT(many.v[j], WithinAbs(once.v[j], 1e-12));
    }
  }
}

TEST_CASE("rest-to-rest closed forms") {
  CHECK(rest_to_rest_duration(0, 1.1, 1.1) == 0.0);
  CHECK_THAT(rest_to_rest_duration(10, 1.1, 1.1), WithinAbs(10 / 1.1 + 1, 1e-12));
  CHECK_THAT(rest_to_rest_duration(10, 1.1, 1.1), WithinAbs(10.0909, 1e-4));
  CHECK_THAT(rest_to_rest_duration(0.5, 1.1, 1.1), WithinAbs(2 * std::sqrt(0.5 / 1.1), 1e-12));
  CHECK_THAT(rest_to_rest_duration(0.5, 1.1, 1.1), WithinAbs(1.3484, 1e-4));
  CHECK_THROWS_AS(rest_to_rest_duration(-1, 1.1, 1.1), Error);
}

TEST_CASE("duration monotonicity") {
  double prev = 0.0;
  for (double d = 0.0; d < 20.0; d += 0.37) {
    const double t = rest_to_rest_duration(d, 1.1, 1.1);
    CHECK(t >= prev);
    prev = t;
  }
  for (double v : {0.5, 1.0, 2.0}) {
    CHECK(rest_to_rest_duration(5, v, 1.0) >= rest_to_rest_duration(5, v * 1.5, 1.0));
    CHECK(rest_to_rest_duration(5, 1.0, v) >= rest_to_rest_duration(5, 1.0, v * 1.5));
  }
}

TEST_CASE("ten metre segment at 1.1 m/s and 1.1 m/s^2") {
  const auto seg = rest_to_rest_segment({0, 0, 0}, {10, 0, 0}, default_limits(), 0.05);
  const auto n   = static_cast<std::size_t>(std::ceil(10.0909090909 / 0.05));
  CHECK(seg.controls.size() == n);
  CHECK(seg.trace.size() == n + 1);
  double peak = 0.0;
  for (const auto& s : seg.trace.samples()) { peak = std::max(peak, std::abs(s[3])); }
  CHECK(peak <= 1.1 + 1e-9);
  CHECK(peak >= 1.09);
  const auto& last = seg.trace[seg.trace.last_index()];
  CHECK_THAT(last[0], WithinAbs(10.0, 1e-9));
  CHECK(std::abs(last[3]) <= 1e-12);
}

TEST_CASE("degenerate segment") {
  const auto seg = rest_to_rest_segment({1, 2, 3}, {1, 2, 3}, default_limits(), 0.05);
  CHECK(seg.trace.size() == 1);
  CHECK(seg.controls.empty());
}

TEST_CASE("random segments respect limits, stay on the line and stop at the goal") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> d(-8, 8);
  std::uniform_real_distribution<double> lim(0.3, 2.0);
  for (int i = 0; i < 60; ++i) {
    const Vec3 p0{d(rng), d(rng), d(rng)};
    const Vec3 p1{d(rng), d(rng), d(rng)};
    const auto limits = KinematicLimits::make({lim(rng), lim(rng), lim(rng)}, {lim(rng), lim(rng), lim(rng)});
    const auto seg    = rest_to_rest_segment(p0, p1, limits, 0.05);
    for (const auto& s : seg.trace.samples()) {
      for (std::size_t j = 0; j < 3; ++j) { CHECK(std::abs(s[3 + j]) <= limits.v_max[j] + 1e-9); }
      CHECK(distance_to_line({s[0], s[1], s[2]}, p0, p1) <= 1e-9);
    }
    for (const auto& a : seg.controls) {
      for (std::size_t j = 0; j < 3; ++j) { CHECK(std::abs(a[j]) <= limits.a_max[j] + 1e-9); }
    }
    const auto& last = seg.trace[seg.trace.last_index()];
    double travel    = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(std::abs(last[3 + j]) <= 1e-12);
      travel = std::max(travel, std::abs(last[j] - p1[j]));
    }
    CHECK(travel <= std::max({limits.v_max[0], limits.v_max[1], limits.v_max[2]}) * 0.05);
  }
}

TEST_CASE("controls recovered from a rollout") {
  const ControlSeq u{{1, 0, -1}, {0.5, 0.25, 0}, {0, 0, 0}};
  const auto tr = rollout(State{}, u, 0.0, 0.5);
  const auto back = controls_from_trace(tr.trace);
  REQUIRE(back.size() == u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    for (std::size_t j = 0; j < 3; ++j) { CHECK_THAT(back[k][j], WithinAbs(u[k][j], 1e-12)); }
  }
}

TEST_CASE("limits must be positive") {
  CHECK_THROWS_AS(KinematicLimits::make({1, 0, 1}, {1, 1, 1}), Error);
  CHECK_THROWS_AS(step(State{}, {0, 0, 0}, 0.0), Error);
}

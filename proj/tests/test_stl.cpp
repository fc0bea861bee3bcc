#include "oracles.hpp"

#include "ergoplan/error.hpp"
#include "ergoplan/stl.hpp"

#include <catch_amalgamated.hpp>

using namespace ergoplan;
using namespace ergoplan::stl;
using Catch::Matchers::WithinAbs;

namespace {

auto p1_trace(std::vector<double> p1, double dt) -> TimedTrace {
  std::vector<StateVec> xs;
  for (double x : p1) { xs.push_back({x, 0, 0, 0, 0, 0}); }
  return TimedTrace(0.0, dt, std::move(xs));
}

auto point_trace(Vec3 p) -> TimedTrace { return TimedTrace(0.0, 1.0, {{p[0], p[1], p[2], 0, 0, 0}}); }

auto affine_p1(double a, double b) -> Formula {
  return predicate(AffinePredicate::make({a, 0, 0, 0, 0, 0}, b));
}

auto requires_code(ErrorCode code) {
  return Catch::Matchers::Predicate<Error>([code](const Error& e) { return e.code() == code; },
                                           std::string("error code ") + std::string(to_string(code)));
}

} // namespace

TEST_CASE("window indices on the grid") {
  const auto tr = p1_trace(std::vector<double>(10, 0.0), 1.0);
  CHECK(window_indices(tr, 0, Interval::make(0, 2)) == IndexRange{0, 2});
  CHECK(window_indices(tr, 3, Interval::make(0, 0)) == IndexRange{3, 3});

  const auto half = p1_trace(std::vector<double>(10, 0.0), 0.5);
  // t = 1.0, window [1.25, 1.6]: the only grid point is 1.5
  CHECK(window_indices(half, 2, Interval::make(0.25, 0.6)) == IndexRange{3, 3});
}

TEST_CASE("window indices clip at the end and reject empty windows") {
  const auto tr = p1_trace({0, 0, 0, 0}, 1.0);
  CHECK(window_indices(tr, 2, Interval::make(0, 5)) == IndexRange{2, 3});
  CHECK_THROWS_MATCHES(window_indices(tr, 3, Interval::make(1, 2)), Error, requires_code(ErrorCode::EmptyWindow));
  CHECK_THROWS_MATCHES(window_indices(tr, 0, Interval::make(0.2, 0.4)), Error, requires_code(ErrorCode::EmptyWindow));
}

TEST_CASE("interval validation") {
  CHECK_THROWS_MATCHES(Interval::make(2, 1), Error, requires_code(ErrorCode::InvalidArgument));
  CHECK_THROWS_MATCHES(Interval::make(-1, 1), Error, requires_code(ErrorCode::InvalidArgument));
}

TEST_CASE("robustness of predicates and negation") {
  const auto tr = p1_trace({3}, 1.0);
  const auto mu = affine_p1(-1, 10);
  CHECK(eval_robustness(mu, tr, 0) == 7.0);
  CHECK(eval_robustness(negation(mu), tr, 0) == -7.0);
}

TEST_CASE("always takes the window minimum") {
  const auto tr = p1_trace({3, 5, 1}, 1.0);
  CHECK(eval_robustness(always(Interval::make(0, 2), affine_p1(-1, 10)), tr, 0) == 5.0);
}

TEST_CASE("until follows the non-strict recursion") {
  const auto tr = p1_trace({1, 2, 5}, 1.0);
  const auto f  = until(Interval::make(0, 2), affine_p1(1, 0), affine_p1(1, -4));
  CHECK(eval_robustness(f, tr, 0) == 1.0);
  CHECK(eval_robustness(f, tr, 0) == oracle::robustness(f, tr, 0));
}

TEST_CASE("boolean satisfaction needs strictly positive robustness") {
  const auto tr = p1_trace({5}, 1.0);
  CHECK(eval_bool(affine_p1(1, 0), tr, 0));
  CHECK_FALSE(eval_bool(affine_p1(1, -12), tr, 0));
  CHECK_FALSE(eval_bool(affine_p1(1, -5), tr, 0));
}

TEST_CASE("box membership margins") {
  const auto box = Box3::make({0, 0, 0}, {10, 10, 10});
  CHECK(eval_robustness(box_contains(box), point_trace({1, 2, 3}), 0) == 1.0);
  CHECK(eval_robustness(box_contains(box), point_trace({0, 5, 5}), 0) == 0.0);
  CHECK(eval_robustness(box_contains(box), point_trace({-1, 5, 5}), 0) == -1.0);
  CHECK(eval_robustness(box_avoids(box), point_trace({1, 2, 3}), 0) == -1.0);
  CHECK(eval_robustness(box_avoids(box), point_trace({-1, 5, 5}), 0) == 1.0);
}

TEST_CASE("box_avoids is the exact negation of box_contains") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-5, 15);
  const auto box = Box3::make({0, 1, 2}, {4, 6, 9});
  for (int i = 0; i < 200; ++i) {
    const auto tr = point_trace({d(rng), d(rng), d(rng)});
    CHECK(eval_robustness(box_avoids(box), tr, 0) == -eval_robustness(box_contains(box), tr, 0));
  }
}

TEST_CASE("enlarging a box never lowers membership robustness") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(-5, 15);
  const auto small = Box3::make({0, 1, 2}, {4, 6, 9});
  const auto big   = Box3::make({-1, 1, 0}, {4.5, 8, 9});
  for (int i = 0; i < 200; ++i) {
    const auto tr = point_trace({d(rng), d(rng), d(rng)});
    CHECK(eval_robustness(box_contains(big), tr, 0) >= eval_robustness(box_contains(small), tr, 0));
  }
}

TEST_CASE("box margin is the signed distance along a single violated axis") {
  const auto box = Box3::make({0, 0, 0}, {10, 10, 10});
  CHECK(eval_robustness(box_contains(box), point_trace({5, 13, 5}), 0) == -3.0);
  CHECK(eval_robustness(box_contains(box), point_trace({5, 5, 9.5}), 0) == 0.5);
}

TEST_CASE("Box3 rejects degenerate extents") {
  CHECK_THROWS_MATCHES(Box3::make({0, 0, 0}, {1, 0, 1}), Error, requires_code(ErrorCode::BadBox));
}

TEST_CASE("random formulas agree with the brute-force recursion") {
  std::mt19937_64 rng(2024);
  const double dt = 0.1;
  oracle::FormulaGen gen{rng, dt};
  for (int i = 0; i < 150; ++i) {
    const auto f       = gen(4);
    const auto horizon = oracle::reach(f, dt);
    const auto tr      = oracle::random_trace(rng, horizon + 1 + static_cast<std::size_t>(gen.pick(0, 8)), dt);
    INFO(to_string(f));
    CHECK_THAT(eval_robustness(f, tr, 0), WithinAbs(oracle::robustness(f, tr, 0), 1e-12));
  }
}

TEST_CASE("negation and De Morgan identities") {
  std::mt19937_64 rng(99);
  const double dt = 0.5;
  oracle::FormulaGen gen{rng, dt};
  for (int i = 0; i < 60; ++i) {
    const auto a  = gen(3);
    const auto b  = gen(3);
    const auto tr = oracle::random_trace(rng, std::max(oracle::reach(a, dt), oracle::reach(b, dt)) + 1, dt);
    CHECK(eval_robustness(negation(a), tr, 0) == -eval_robustness(a, tr, 0));
    CHECK(eval_robustness(conjunction({a, b}), tr, 0) ==
          -eval_robustness(disjunction({negation(a), negation(b)}), tr, 0));
  }
}

TEST_CASE("formula structure helpers") {
  const auto f = always(Interval::make(0, 1), conjunction({affine_p1(1, 0), affine_p1(-1, 2)}));
  CHECK(node_count(f) == 4);
  CHECK(same_structure(f, always(Interval::make(0, 1), conjunction({affine_p1(1, 0), affine_p1(-1, 2)}))));
  CHECK_FALSE(same_structure(f, eventually(Interval::make(0, 1), conjunction({affine_p1(1, 0), affine_p1(-1, 2)}))));
  CHECK_FALSE(to_string(f).empty());
}

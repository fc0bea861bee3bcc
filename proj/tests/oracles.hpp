#pragma once

// Reference implementations used only by the tests. Nothing here calls into
// the evaluation engine or the branch-and-bound.

#include "ergoplan/error.hpp"
#include "ergoplan/mission.hpp"
#include "ergoplan/routing.hpp"
#include "ergoplan/smooth.hpp"
#include "ergoplan/stl.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using namespace ergoplan;

// Literal recursion. Windows are found by comparing sample times with the
// shifted interval, not by index arithmetic.
inline auto window(const stl::TimedTrace& tr, std::size_t t, const stl::Interval& iv) -> std::vector<std::size_t> {
  std::vector<std::size_t> ks;
  const double slack = 1e-9 * tr.dt();
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const double tk = tr.time(k);
    if (tk >= tr.time(t) + iv.lo - slack && tk <= tr.time(t) + iv.hi + slack) { ks.push_back(k); }
  }
  if (ks.empty()) { throw Error(ErrorCode::EmptyWindow, "oracle window"); }
  return ks;
}

class BruteForce {
 public:
  explicit BruteForce(const stl::TimedTrace& tr) : tr_{tr} {}

  auto operator()(const stl::Formula& f, std::size_t t) -> double {
    const auto key = std::make_pair(f.get(), t);
    if (auto it = memo_.find(key); it != memo_.end()) { return it->second; }
    const double r = compute(*f, t);
    memo_.emplace(key, r);
    return r;
  }

 private:
  auto compute(const stl::Node& n, std::size_t t) -> double {
    auto& self = *this;
    switch (n.op) {
      case stl::Op::Pred: return n.pred.eval(tr_[t]);
      case stl::Op::Not: return -self(n.children[0], t);
      case stl::Op::And: {
        double r = std::numeric_limits<double>::infinity();
        for (const auto& c : n.children) { r = std::min(r, self(c, t)); }
        return r;
      }
      case stl::Op::Or: {
        double r = -std::numeric_limits<double>::infinity();
        for (const auto& c : n.children) { r = std::max(r, self(c, t)); }
        return r;
      }
      case stl::Op::Always: {
        double r = std::numeric_limits<double>::infinity();
        for (auto k : window(tr_, t, n.interval)) { r = std::min(r, self(n.children[0], k)); }
        return r;
      }
      case stl::Op::Eventually: {
        double r = -std::numeric_limits<double>::infinity();
        for (auto k : window(tr_, t, n.interval)) { r = std::max(r, self(n.children[0], k)); }
        return r;
      }
      case stl::Op::Until: {
        double r = -std::numeric_limits<double>::infinity();
        for (auto k : window(tr_, t, n.interval)) {
          double lhs = std::numeric_limits<double>::infinity();
          for (std::size_t j = t; j <= k; ++j) { lhs = std::min(lhs, self(n.children[0], j)); }
          r = std::max(r, std::min(self(n.children[1], k), lhs));
        }
        return r;
      }
    }
    return 0.0;
  }

  const stl::TimedTrace& tr_;
  std::map<std::pair<const stl::Node*, std::size_t>, double> memo_;
};

inline auto robustness(const stl::Formula& f, const stl::TimedTrace& tr, std::size_t t) -> double {
  return BruteForce(tr)(f, t);
}

// Furthest sample offset a formula can look ahead.
inline auto reach(const stl::Formula& f, double dt) -> std::size_t {
  std::size_t sub = 0;
  for (const auto& c : f->children) { sub = std::max(sub, reach(c, dt)); }
  switch (f->op) {
    case stl::Op::Always:
    case stl::Op::Eventually:
    case stl::Op::Until: return sub + static_cast<std::size_t>(std::floor(f->interval.hi / dt + 1e-9));
    default: return sub;
  }
}

struct FormulaGen {
  std::mt19937_64& rng;
  double dt;
  std::size_t max_window = 10;

  auto uniform(double lo, double hi) -> double { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  auto pick(int lo, int hi) -> int { return std::uniform_int_distribution<int>(lo, hi)(rng); }

  auto pred() -> stl::Formula {
    stl::StateVec c{};
    const int nz = pick(1, 2);
    for (int i = 0; i < nz; ++i) { c[static_cast<std::size_t>(pick(0, 5))] = uniform(-2.0, 2.0); }
    return stl::predicate(stl::AffinePredicate::make(c, uniform(-1.0, 1.0)));
  }

  auto interval() -> stl::Interval {
    const int a = pick(0, static_cast<int>(max_window) / 2);
    const int b = pick(a, static_cast<int>(max_window));
    // Occasionally put the bounds between grid points.
    const double jitter = pick(0, 3) == 0 ? 0.5 * dt : 0.0;
    const double lo     = std::max(0.0, a * dt - jitter);
    return stl::Interval::make(lo, std::max(lo, b * dt));
  }

  auto operator()(int depth) -> stl::Formula {
    if (depth <= 0) { return pred(); }
    switch (pick(0, 7)) {
      case 0: return pred();
      case 1: return stl::negation((*this)(depth - 1));
      case 2: return stl::conjunction({(*this)(depth - 1), (*this)(depth - 1)});
      case 3: return stl::disjunction({(*this)(depth - 1), (*this)(depth - 1), (*this)(depth - 1)});
      case 4: return stl::always(interval(), (*this)(depth - 1));
      case 5: return stl::eventually(interval(), (*this)(depth - 1));
      default: return stl::until(interval(), (*this)(depth - 1), (*this)(depth - 1));
    }
  }
};

inline auto random_trace(std::mt19937_64& rng, std::size_t samples, double dt) -> stl::TimedTrace {
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  std::vector<stl::StateVec> xs(samples);
  for (auto& x : xs) {
    for (auto& v : x) { v = d(rng); }
  }
  return stl::TimedTrace(0.0, dt, std::move(xs));
}

// Minimum over every depot-anchored walk: operators in some order, cut into
// runs of at most C, each run closed by some refill. Costs are summed as
// sum w_ij z_ij over the walk's edge multiset in canonical edge order.
struct RoutingOptimum {
  double objective = std::numeric_limits<double>::infinity();
  std::map<routing::Edge, int> z;
  std::size_t walks = 0;
};

inline auto walk_edges(const std::vector<std::size_t>& walk) -> std::map<routing::Edge, int> {
  std::map<routing::Edge, int> z;
  for (std::size_t i = 1; i < walk.size(); ++i) {
    const auto a = std::min(walk[i - 1], walk[i]);
    const auto b = std::max(walk[i - 1], walk[i]);
    ++z[{a, b}];
  }
  return z;
}

inline auto edge_sum(const routing::RoutingGraph& g, const std::map<routing::Edge, int>& z) -> double {
  double s = 0.0;
  for (const auto& [e, mult] : z) { s += g.weights[e.first][e.second] * mult; }
  return s;
}

inline auto exhaustive_routing(const routing::RoutingGraph& g) -> RoutingOptimum {
  std::vector<std::size_t> ops;
  std::vector<std::size_t> refills;
  std::size_t depot = 0;
  for (std::size_t v = 0; v < g.size(); ++v) {
    switch (g.kind(v)) {
      case routing::VertexKind::Operator: ops.push_back(v); break;
      case routing::VertexKind::Refill: refills.push_back(v); break;
      case routing::VertexKind::Depot: depot = v; break;
    }
  }
  const std::size_t tau = ops.size();
  const auto cap        = static_cast<std::size_t>(g.capacity);
  RoutingOptimum best;

  // Run lengths composing tau with every part <= cap.
  std::vector<std::vector<std::size_t>> compositions;
  std::vector<std::size_t> cur;
  auto compose = [&](auto&& self, std::size_t left) -> void {
    if (left == 0) {
      compositions.push_back(cur);
      return;
    }
    for (std::size_t len = 1; len <= std::min(cap, left); ++len) {
      cur.push_back(len);
      self(self, left - len);
      cur.pop_back();
    }
  };
  compose(compose, tau);

  std::sort(ops.begin(), ops.end());
  do {
    for (const auto& comp : compositions) {
      const std::size_t runs = comp.size();
      std::size_t combos     = 1;
      for (std::size_t i = 0; i < runs; ++i) { combos *= refills.size(); }
      for (std::size_t code = 0; code < combos; ++code) {
        std::vector<std::size_t> walk{depot};
        std::size_t c   = code;
        std::size_t pos = 0;
        for (std::size_t r = 0; r < runs; ++r) {
          for (std::size_t i = 0; i < comp[r]; ++i) { walk.push_back(ops[pos++]); }
          walk.push_back(refills[c % refills.size()]);
          c /= refills.size();
        }
        const auto z   = walk_edges(walk);
        const double s = edge_sum(g, z);
        ++best.walks;
        if (s < best.objective) {
          best.objective = s;
          best.z         = z;
        }
      }
    }
  } while (std::next_permutation(ops.begin(), ops.end()));
  return best;
}

// Constraint audit by full subset enumeration: operator degree 2, depot
// degree 1, and at least 2 ceil(|S| / C) edges leaving every operator set S.
inline auto audit_solution(const routing::RoutingGraph& g, const std::map<routing::Edge, int>& z) -> std::string {
  std::vector<int> deg(g.size(), 0);
  for (const auto& [e, m] : z) {
    deg[e.first] += m;
    deg[e.second] += m;
  }
  std::vector<std::size_t> ops;
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (g.kind(v) == routing::VertexKind::Operator) {
      ops.push_back(v);
      if (deg[v] != 2) { return "operator degree " + std::to_string(deg[v]); }
    }
    if (g.kind(v) == routing::VertexKind::Depot && deg[v] != 1) { return "depot degree " + std::to_string(deg[v]); }
  }
  const std::size_t tau = ops.size();
  for (std::size_t mask = 1; mask < (std::size_t{1} << tau); ++mask) {
    std::vector<bool> in(g.size(), false);
    std::size_t size = 0;
    for (std::size_t i = 0; i < tau; ++i) {
      if (mask >> i & 1U) {
        in[ops[i]] = true;
        ++size;
      }
    }
    int crossing = 0;
    for (const auto& [e, m] : z) {
      if (in[e.first] != in[e.second]) { crossing += m; }
    }
    const int need = 2 * static_cast<int>((size + static_cast<std::size_t>(g.capacity) - 1) / static_cast<std::size_t>(g.capacity));
    if (crossing < need) { return "capacity cut violated for subset mask " + std::to_string(mask); }
  }
  return {};
}

inline auto random_mission_graph(std::mt19937_64& rng, std::size_t tau, std::size_t refills, int capacity)
    -> routing::RoutingGraph {
  std::uniform_real_distribution<double> d(0.0, 20.0);
  routing::RoutingGraph g;
  g.capacity = capacity;
  auto add   = [&](routing::VertexKind k) {
    g.vertices.push_back({g.vertices.size(), k, {d(rng), d(rng), d(rng) * 0.25}});
  };
  add(routing::VertexKind::Depot);
  for (std::size_t i = 0; i < tau; ++i) { add(routing::VertexKind::Operator); }
  for (std::size_t i = 0; i < refills; ++i) { add(routing::VertexKind::Refill); }
  const std::size_t n = g.vertices.size();
  g.weights.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto& a = g.vertices[i].position;
      const auto& b = g.vertices[j].position;
      g.weights[i][j] = std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) +
                                  (a[2] - b[2]) * (a[2] - b[2]));
    }
  }
  return g;
}

inline auto data_dir() -> std::filesystem::path { return ERGOPLAN_DATA_DIR; }

// Central differences of eval_smooth with respect to every trace entry.
// Entries where the one-sided slopes disagree sit on a kink of the smooth
// recursion (AGM branch switch) and are reported as NaN.
inline auto finite_differences(const stl::Formula& f, const stl::TimedTrace& tr, const smooth::SmoothConfig& cfg, double h)
    -> std::vector<double> {
  const double f0 = smooth::eval_smooth(f, tr, 0, cfg);
  std::vector<double> out;
  std::vector<stl::StateVec> xs(tr.samples().begin(), tr.samples().end());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    for (std::size_t i = 0; i < stl::kStateDim; ++i) {
      const double keep = xs[k][i];
      xs[k][i]          = keep + h;
      const double fp   = smooth::eval_smooth(f, stl::TimedTrace(tr.t0(), tr.dt(), xs), 0, cfg);
      xs[k][i]          = keep - h;
      const double fm   = smooth::eval_smooth(f, stl::TimedTrace(tr.t0(), tr.dt(), xs), 0, cfg);
      xs[k][i]          = keep;
      const double right = (fp - f0) / h;
      const double left  = (f0 - fm) / h;
      const bool kink    = std::abs(right - left) > 1e-3 * std::max(1.0, std::abs(right) + std::abs(left));
      out.push_back(kink ? std::nan("") : (fp - fm) / (2 * h));
    }
  }
  return out;
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked  = 0;
  std::size_t skipped  = 0;
};

inline auto check_gradient(const stl::Formula& f, const stl::TimedTrace& tr, const smooth::SmoothConfig& cfg) -> GradCheck {
  const auto vg = smooth::eval_smooth_grad(f, tr, 0, cfg);
  const auto fd = finite_differences(f, tr, cfg, 1e-5);
  GradCheck out;
  for (std::size_t i = 0; i < fd.size(); ++i) {
    if (std::isnan(fd[i])) {
      ++out.skipped;
      continue;
    }
    ++out.checked;
    const double scale = std::max({1.0, std::abs(fd[i]), std::abs(vg.grad[i])});
    out.max_rel_error  = std::max(out.max_rel_error, std::abs(vg.grad[i] - fd[i]) / scale);
  }
  return out;
}

} // namespace oracle

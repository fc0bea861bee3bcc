#include "ergoplan/routing.hpp"

#include "ergoplan/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <sstream>

namespace ergoplan::routing {

namespace {

using Mask = std::uint64_t;

auto bit(std::size_t v) -> Mask { return Mask{1} << v; }

auto distance(const Vec3& a, const Vec3& b) -> double {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Lazy cut: sum of z over edges crossing `set` >= rhs.
struct Cut {
  Mask set = 0;
  int rhs  = 0;
};

class BranchAndBound {
 public:
  explicit BranchAndBound(const RoutingGraph& g)
      : g_{g}, vars_{decision_edges(g)}, incident_(g.size()), operators_{g.operator_ids()} {
    if (g.size() > 64) { throw Error(ErrorCode::InvalidArgument, "routing graph limited to 64 vertices"); }
    for (std::size_t k = 0; k < vars_.size(); ++k) {
      incident_[vars_[k].edge.first].push_back(k);
      incident_[vars_[k].edge.second].push_back(k);
    }
    for (auto& inc : incident_) {
      std::stable_sort(inc.begin(), inc.end(), [&](std::size_t a, std::size_t b) {
        return vars_[a].weight < vars_[b].weight;
      });
    }
    depot_ = g.depot_ids().front();
  }

  auto solve(SolveStats* stats) -> IlpSolution {
    struct Node {
      double lb = 0.0;
      std::size_t seq = 0;
      std::vector<int> z; // -1 undecided
      std::size_t next = 0;
    };
    auto worse = [](const Node& a, const Node& b) {
      if (a.lb != b.lb) { return a.lb > b.lb; }
      return a.seq > b.seq;
    };
    std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);
    std::size_t seq = 0;

    Node root;
    root.z.assign(vars_.size(), -1);
    root.lb = lower_bound(root.z);
    open.push(std::move(root));

    while (!open.empty()) {
      Node node = open.top();
      open.pop();
      ++stats_.nodes_explored;
      if (have_best_ && node.lb > best_obj_ + tolerance()) { break; }
      // Cuts may have been added since the node was queued.
      if (!partial_feasible(node.z)) { continue; }

      if (node.next == vars_.size()) {
        check_leaf(node.z);
        continue;
      }
      for (int value = 0; value <= vars_[node.next].max_mult; ++value) {
        Node child;
        child.z            = node.z;
        child.z[node.next] = value;
        child.next         = node.next + 1;
        if (!partial_feasible(child.z)) { continue; }
        child.lb  = lower_bound(child.z);
        child.seq = ++seq;
        if (have_best_ && child.lb > best_obj_ + tolerance()) { continue; }
        open.push(std::move(child));
      }
    }
    if (stats != nullptr) { *stats = stats_; }
    if (!have_best_) { throw Error(ErrorCode::Infeasible, "no assignment satisfies the routing constraints"); }

    IlpSolution sol;
    for (std::size_t k = 0; k < vars_.size(); ++k) { sol.z[vars_[k].edge] = best_z_[k]; }
    sol.objective = objective_of(g_, sol.z);
    return sol;
  }

 private:
  [[nodiscard]] auto tolerance() const -> double { return 1e-9 * (1.0 + std::abs(best_obj_)); }

  [[nodiscard]] auto partial_feasible(const std::vector<int>& z) const -> bool {
    for (std::size_t v = 0; v < g_.size(); ++v) {
      const auto kind = g_.kind(v);
      if (kind == VertexKind::Refill) { continue; }
      int fixed = 0;
      int open  = 0;
      for (auto k : incident_[v]) {
        if (z[k] < 0) {
          open += vars_[k].max_mult;
        } else {
          fixed += z[k];
        }
      }
      const int need = kind == VertexKind::Operator ? 2 : 1;
      if (fixed > need || fixed + open < need) { return false; }
    }
    for (const auto& cut : cuts_) {
      int reach = 0;
      for (std::size_t k = 0; k < vars_.size() && reach < cut.rhs; ++k) {
        const auto [i, j] = vars_[k].edge;
        const bool crosses = ((cut.set & bit(i)) != 0) != ((cut.set & bit(j)) != 0);
        if (!crosses) { continue; }
        reach += z[k] < 0 ? vars_[k].max_mult : z[k];
      }
      if (reach < cut.rhs) { return false; }
    }
    return true;
  }

  // Every edge touches an operator, so
  //   cost = 1/2 sum_{operators j} S_j + 1/2 sum_{operator-other edges} w z
  // where S_j is the weighted degree of j; each S_j is bounded below by its
  // fixed part plus the cheapest completion to degree two.
  [[nodiscard]] auto lower_bound(const std::vector<int>& z) const -> double {
    double half_sum = 0.0;
    for (auto v : operators_) {
      int deg      = 0;
      double fixed = 0.0;
      for (auto k : incident_[v]) {
        if (z[k] > 0) {
          deg += z[k];
          fixed += vars_[k].weight * z[k];
        }
      }
      int need          = 2 - deg;
      double completion = 0.0;
      for (auto k : incident_[v]) {
        if (need <= 0) { break; }
        if (z[k] >= 0) { continue; }
        const int take = std::min(need, vars_[k].max_mult);
        completion += take * vars_[k].weight;
        need -= take;
      }
      half_sum += fixed + completion;
    }
    double mixed = 0.0;
    for (std::size_t k = 0; k < vars_.size(); ++k) {
      const auto [i, j] = vars_[k].edge;
      const bool both_ops = g_.kind(i) == VertexKind::Operator && g_.kind(j) == VertexKind::Operator;
      if (!both_ops && z[k] > 0) { mixed += vars_[k].weight * z[k]; }
    }
    return 0.5 * (half_sum + mixed);
  }

  [[nodiscard]] auto crossing(const std::vector<int>& z, Mask set) const -> int {
    int total = 0;
    for (std::size_t k = 0; k < vars_.size(); ++k) {
      const auto [i, j] = vars_[k].edge;
      if (((set & bit(i)) != 0) != ((set & bit(j)) != 0)) { total += z[k]; }
    }
    return total;
  }

  void add_cut(Mask set, int rhs) {
    for (const auto& c : cuts_) {
      if (c.set == set && c.rhs >= rhs) { return; }
    }
    cuts_.push_back({set, rhs});
    ++stats_.cuts_added;
  }

  // Capacity cuts over operator subsets of size <= 8, enumerated by
  // increasing subset size.
  auto separate_capacity(const std::vector<int>& z) -> bool {
    bool violated       = false;
    const std::size_t t = operators_.size();
    const std::size_t max_size = std::min<std::size_t>(t, 8);
    std::vector<std::size_t> pick;
    for (std::size_t size = 1; size <= max_size; ++size) {
      pick.resize(size);
      std::iota(pick.begin(), pick.end(), 0);
      while (true) {
        Mask set = 0;
        for (auto p : pick) { set |= bit(operators_[p]); }
        const int rhs = 2 * capacity_cut_rhs(size, g_.capacity);
        if (crossing(z, set) < rhs) {
          add_cut(set, rhs);
          violated = true;
        }
        // next combination
        std::size_t i = size;
        while (i > 0 && pick[i - 1] == t - size + (i - 1)) { --i; }
        if (i == 0) { break; }
        ++pick[i - 1];
        for (std::size_t q = i; q < size; ++q) { pick[q] = pick[q - 1] + 1; }
      }
    }
    return violated;
  }

  // Components of the support graph that hold operators but not the depot.
  auto separate_components(const std::vector<int>& z) -> bool {
    std::vector<std::size_t> parent(g_.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t v) {
      while (parent[v] != v) { v = parent[v] = parent[parent[v]]; }
      return v;
    };
    for (std::size_t k = 0; k < vars_.size(); ++k) {
      if (z[k] > 0) { parent[find(vars_[k].edge.first)] = find(vars_[k].edge.second); }
    }
    std::vector<Mask> comp(g_.size(), 0);
    for (std::size_t v = 0; v < g_.size(); ++v) { comp[find(v)] |= bit(v); }
    bool violated   = false;
    const auto root = find(depot_);
    for (std::size_t r = 0; r < g_.size(); ++r) {
      if (comp[r] == 0 || r == root) { continue; }
      Mask ops = 0;
      for (auto o : operators_) { ops |= comp[r] & bit(o); }
      if (ops == 0) { continue; }
      const auto size = static_cast<std::size_t>(std::popcount(ops));
      const int rhs   = 2 * capacity_cut_rhs(size, g_.capacity);
      if (crossing(z, ops) < rhs) { add_cut(ops, rhs); }
      add_cut(comp[r], 1);
      violated = true;
    }
    return violated;
  }

  // A single walk from the depot exists iff the support is connected (checked
  // above) and the odd-degree vertices are the depot plus one refill.
  [[nodiscard]] auto walk_parity_ok(const std::vector<int>& z) const -> bool {
    std::vector<int> deg(g_.size(), 0);
    for (std::size_t k = 0; k < vars_.size(); ++k) {
      deg[vars_[k].edge.first] += z[k];
      deg[vars_[k].edge.second] += z[k];
    }
    std::size_t odd_refills = 0;
    for (std::size_t v = 0; v < g_.size(); ++v) {
      if (g_.kind(v) == VertexKind::Refill && deg[v] % 2 != 0) { ++odd_refills; }
    }
    return odd_refills == 1;
  }

  void check_leaf(const std::vector<int>& z) {
    ++stats_.leaves_checked;
    const bool cap  = separate_capacity(z);
    const bool comp = separate_components(z);
    if (cap || comp || !walk_parity_ok(z)) { return; }
    double obj = 0.0;
    for (std::size_t k = 0; k < vars_.size(); ++k) { obj += vars_[k].weight * z[k]; }
    if (!have_best_ || obj < best_obj_ - tolerance() ||
        (obj <= best_obj_ + tolerance() && z < best_z_)) {
      have_best_ = true;
      best_obj_  = obj;
      best_z_    = z;
    }
  }

  const RoutingGraph& g_;
  std::vector<EdgeVar> vars_;
  std::vector<std::vector<std::size_t>> incident_;
  std::vector<std::size_t> operators_;
  std::size_t depot_ = 0;
  std::vector<Cut> cuts_;
  SolveStats stats_;
  bool have_best_  = false;
  double best_obj_ = 0.0;
  std::vector<int> best_z_;
};

auto vertex_position(std::size_t v, const RoutingGraph& g) -> const Vec3& { return g.vertices[v].position; }

} // namespace

auto RoutingGraph::operator_ids() const -> std::vector<std::size_t> {
  std::vector<std::size_t> out;
  for (const auto& v : vertices) {
    if (v.kind == VertexKind::Operator) { out.push_back(v.id); }
  }
  return out;
}

auto RoutingGraph::refill_ids() const -> std::vector<std::size_t> {
  std::vector<std::size_t> out;
  for (const auto& v : vertices) {
    if (v.kind == VertexKind::Refill) { out.push_back(v.id); }
  }
  return out;
}

auto RoutingGraph::depot_ids() const -> std::vector<std::size_t> {
  std::vector<std::size_t> out;
  for (const auto& v : vertices) {
    if (v.kind == VertexKind::Depot) { out.push_back(v.id); }
  }
  return out;
}

auto build_graph(const Mission& mission) -> RoutingGraph {
  if (mission.operators.empty() || mission.refills.empty()) {
    throw Error(ErrorCode::InvalidArgument, "routing needs at least one operator and one refill station");
  }
  RoutingGraph g;
  g.capacity = mission.capacity;
  g.vertices.push_back({0, VertexKind::Depot, mission.depot});
  for (const auto& op : mission.operators) {
    g.vertices.push_back({g.vertices.size(), VertexKind::Operator, op.handover_box.center()});
  }
  for (const auto& r : mission.refills) {
    g.vertices.push_back({g.vertices.size(), VertexKind::Refill, r.center()});
  }
  const std::size_t n = g.vertices.size();
  g.weights.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      g.weights[i][j] = g.weights[j][i] = distance(g.vertices[i].position, g.vertices[j].position);
    }
  }
  return g;
}

auto decision_edges(const RoutingGraph& g) -> std::vector<EdgeVar> {
  std::vector<EdgeVar> vars;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = i + 1; j < g.size(); ++j) {
      const auto ki = g.kind(i);
      const auto kj = g.kind(j);
      const bool i_op = ki == VertexKind::Operator;
      const bool j_op = kj == VertexKind::Operator;
      if (!i_op && !j_op) { continue; }
      if (i_op && j_op && g.capacity < 2) { continue; }
      const bool to_refill = ki == VertexKind::Refill || kj == VertexKind::Refill;
      vars.push_back({{i, j}, g.weights[i][j], to_refill ? 2 : 1});
    }
  }
  return vars;
}

auto capacity_cut_rhs(std::size_t subset_size, int capacity) -> int {
  if (subset_size < 1 || capacity < 1) {
    throw Error(ErrorCode::InvalidArgument, "capacity cut needs a nonempty subset and positive capacity");
  }
  const auto c = static_cast<std::size_t>(capacity);
  return static_cast<int>((subset_size + c - 1) / c);
}

auto objective_of(const RoutingGraph& g, const std::map<Edge, int>& z) -> double {
  double total = 0.0;
  for (const auto& [e, mult] : z) { total += g.weights[e.first][e.second] * mult; }
  return total;
}

auto solve_ilp(const RoutingGraph& g, SolveStats* stats) -> IlpSolution {
  if (g.depot_ids().size() != 1) { throw Error(ErrorCode::InvalidArgument, "exactly one depot is supported"); }
  if (g.operator_ids().empty()) { throw Error(ErrorCode::InvalidArgument, "no operators to visit"); }
  if (g.capacity < 1) { throw Error(ErrorCode::InvalidArgument, "capacity must be positive"); }
  if (g.refill_ids().empty()) { throw Error(ErrorCode::Infeasible, "no refill station to end the route at"); }
  BranchAndBound bnb(g);
  return bnb.solve(stats);
}

auto extract_route(const IlpSolution& sol, const RoutingGraph& g) -> Route {
  const std::size_t n = g.size();
  std::vector<std::vector<int>> count(n, std::vector<int>(n, 0));
  std::size_t total = 0;
  for (const auto& [e, mult] : sol.z) {
    if (mult < 0) { throw Error(ErrorCode::InvalidArgument, "negative edge multiplicity"); }
    count[e.first][e.second] += mult;
    count[e.second][e.first] += mult;
    total += static_cast<std::size_t>(mult);
  }
  const auto depots = g.depot_ids();
  if (depots.size() != 1) { throw Error(ErrorCode::InvalidArgument, "exactly one depot is supported"); }

  // Hierholzer, lowest neighbour id first.
  std::vector<std::size_t> stack{depots.front()};
  std::vector<std::size_t> walk;
  while (!stack.empty()) {
    const auto u = stack.back();
    std::size_t v = 0;
    while (v < n && count[u][v] == 0) { ++v; }
    if (v == n) {
      walk.push_back(u);
      stack.pop_back();
    } else {
      --count[u][v];
      --count[v][u];
      stack.push_back(v);
    }
  }
  std::reverse(walk.begin(), walk.end());

  if (walk.size() != total + 1) {
    throw Error(ErrorCode::Disconnected, "edge multiplicities do not form a single walk from the depot");
  }
  // An Euler circuit split at the wrong place, or a walk not ending at a refill.
  std::vector<int> seen(n, 0);
  for (auto v : walk) { ++seen[v]; }
  for (auto o : g.operator_ids()) {
    if (seen[o] != 1) {
      throw Error(ErrorCode::Disconnected, "operator " + std::to_string(o) + " is not visited exactly once");
    }
  }
  if (seen[depots.front()] != 1 || g.kind(walk.back()) != VertexKind::Refill) {
    throw Error(ErrorCode::Disconnected, "walk must leave the depot once and end at a refill station");
  }
  Route route{std::move(walk)};
  if (longest_operator_run(route, g) > static_cast<std::size_t>(g.capacity)) {
    throw Error(ErrorCode::Disconnected, "route exceeds the payload capacity between refills");
  }
  return route;
}

auto longest_operator_run(const Route& route, const RoutingGraph& g) -> std::size_t {
  std::size_t best = 0;
  std::size_t run  = 0;
  for (auto v : route.vertices) {
    run  = g.kind(v) == VertexKind::Operator ? run + 1 : 0;
    best = std::max(best, run);
  }
  return best;
}

namespace {

struct Synthesis {
  dynamics::ControlSeq controls;
  std::vector<Hold> holds;
};

auto hold_steps(double seconds, double dt) -> std::size_t {
  return static_cast<std::size_t>(std::ceil(seconds / dt - 1e-9));
}

auto synthesize_waypoints(const std::vector<Waypoint>& waypoints, const Mission& mission,
                          const dynamics::KinematicLimits& limits) -> Synthesis {
  Synthesis out;
  Vec3 at = mission.depot;
  for (const auto& w : waypoints) {
    auto leg = dynamics::rest_to_rest_controls(at, w.position, limits, mission.dt);
    out.controls.insert(out.controls.end(), leg.begin(), leg.end());
    const std::size_t arrive = out.controls.size();
    out.controls.insert(out.controls.end(), w.hold_steps, Vec3{0.0, 0.0, 0.0});
    out.holds.push_back({w.vertex, arrive, arrive + w.hold_steps});
    at = w.position;
  }
  if (out.controls.size() > mission.samples) {
    const double deficit = static_cast<double>(out.controls.size() - mission.samples) * mission.dt;
    std::ostringstream os;
    os << "route needs " << static_cast<double>(out.controls.size()) * mission.dt << " s but the horizon is "
       << mission.t_total << " s (short by " << deficit << " s)";
    throw Error(ErrorCode::HorizonExceeded, os.str(), deficit);
  }
  // Terminal hold runs to the end of the horizon.
  if (!out.holds.empty()) { out.holds.back().last = mission.samples; }
  out.controls.resize(mission.samples, Vec3{0.0, 0.0, 0.0});
  return out;
}

auto route_waypoints(const Route& route, const Mission& mission) -> std::vector<Waypoint> {
  if (route.vertices.empty()) { throw Error(ErrorCode::InvalidArgument, "empty route"); }
  const RoutingGraph g = build_graph(mission);
  for (auto v : route.vertices) {
    if (v >= g.size()) { throw Error(ErrorCode::InvalidArgument, "route vertex outside the mission graph"); }
  }
  if (g.kind(route.vertices.front()) != VertexKind::Depot) {
    throw Error(ErrorCode::InvalidArgument, "route must start at the depot");
  }
  std::vector<Waypoint> out;
  for (std::size_t i = 1; i < route.vertices.size(); ++i) {
    const auto v    = route.vertices[i];
    const auto kind = g.kind(v);
    const double hold =
        kind == VertexKind::Operator ? mission.t_handover : (kind == VertexKind::Refill ? mission.t_refill : 0.0);
    out.push_back({v, vertex_position(v, g), hold_steps(hold, mission.dt)});
  }
  return out;
}

} // namespace

auto waypoints_to_trajectory(const std::vector<Waypoint>& waypoints, const Mission& mission,
                             const dynamics::KinematicLimits& leg_limits) -> dynamics::Trajectory {
  auto syn = synthesize_waypoints(waypoints, mission, leg_limits);
  return dynamics::rollout(dynamics::State{mission.depot, {0.0, 0.0, 0.0}}, syn.controls, 0.0, mission.dt);
}

auto route_to_trajectory(const Route& route, const Mission& mission) -> dynamics::Trajectory {
  return route_to_trajectory(route, mission, mission.limits);
}

auto route_to_trajectory(const Route& route, const Mission& mission, const dynamics::KinematicLimits& leg_limits)
    -> dynamics::Trajectory {
  return waypoints_to_trajectory(route_waypoints(route, mission), mission, leg_limits);
}

auto route_holds(const Route& route, const Mission& mission, const dynamics::KinematicLimits& leg_limits)
    -> std::vector<Hold> {
  return synthesize_waypoints(route_waypoints(route, mission), mission, leg_limits).holds;
}

} // namespace ergoplan::routing

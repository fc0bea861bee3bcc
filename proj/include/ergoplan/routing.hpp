#pragma once

#include "ergoplan/dynamics.hpp"
#include "ergoplan/mission.hpp"

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

/**
 * @file routing.hpp
 * @brief Capacitated routing over depot, operators and refill stations.
 *
 * The integer program chooses edge multiplicities z_ij minimizing travelled
 * distance such that every operator has degree two, the depot is left exactly
 * once, and every operator subset S sees at least 2 * ceil(|S| / C) crossing
 * edges. It is solved by a combinatorial branch-and-bound whose capacity and
 * connectivity cuts are separated lazily at integer leaves.
 */

namespace ergoplan::routing {

enum class VertexKind { Depot, Operator, Refill };

struct Vertex {
  std::size_t id = 0;
  VertexKind kind = VertexKind::Depot;
  Vec3 position{};
};

struct RoutingGraph {
  std::vector<Vertex> vertices;          ///< depot first, then operators, then refills
  std::vector<std::vector<double>> weights; ///< symmetric Euclidean distances
  int capacity = 1;

  [[nodiscard]] auto size() const noexcept -> std::size_t { return vertices.size(); }
  [[nodiscard]] auto kind(std::size_t v) const -> VertexKind { return vertices[v].kind; }
  [[nodiscard]] auto operator_ids() const -> std::vector<std::size_t>;
  [[nodiscard]] auto refill_ids() const -> std::vector<std::size_t>;
  [[nodiscard]] auto depot_ids() const -> std::vector<std::size_t>;
};

/// Unordered edge, first < second.
using Edge = std::pair<std::size_t, std::size_t>;

/// A decision variable of the integer program.
struct EdgeVar {
  Edge edge;
  double weight = 0.0;
  int max_mult  = 1; ///< 1 between operators / depot, 2 towards a refill
};

struct IlpSolution {
  std::map<Edge, int> z; ///< every decision edge, zeros included
  double objective = 0.0;
};

struct Route {
  std::vector<std::size_t> vertices;
};

/// Vertices at box centers (operators, refills) and the depot point.
[[nodiscard]] auto build_graph(const Mission& mission) -> RoutingGraph;

/// Decision edges in branching order: lexicographic (i, j). Depot-refill and
/// refill-refill pairs have no variable; operator pairs only when C >= 2.
[[nodiscard]] auto decision_edges(const RoutingGraph& g) -> std::vector<EdgeVar>;

/// ceil(subset_size / capacity)
[[nodiscard]] auto capacity_cut_rhs(std::size_t subset_size, int capacity) -> int;

/// Sum of w_ij z_ij in canonical edge order.
[[nodiscard]] auto objective_of(const RoutingGraph& g, const std::map<Edge, int>& z) -> double;

struct SolveStats {
  std::size_t nodes_explored = 0;
  std::size_t leaves_checked = 0;
  std::size_t cuts_added     = 0;
};

/// Optimal solution; among equal objectives the lexicographically least z.
/// Throws Infeasible when no assignment satisfies the constraints and
/// InvalidArgument for graphs with other than one depot.
[[nodiscard]] auto solve_ilp(const RoutingGraph& g, SolveStats* stats = nullptr) -> IlpSolution;

/// Euler walk from the depot over the z multigraph, lowest-id neighbour first.
/// Throws Disconnected when z does not form one depot-anchored walk.
[[nodiscard]] auto extract_route(const IlpSolution& sol, const RoutingGraph& g) -> Route;

/// Longest run of consecutive operators in the route.
[[nodiscard]] auto longest_operator_run(const Route& route, const RoutingGraph& g) -> std::size_t;

/// Rest-to-rest legs between route vertices with handover / refill holds,
/// padded with a terminal hold to exactly N + 1 samples. Throws
/// HorizonExceeded (detail() = missing seconds) when the route does not fit.
[[nodiscard]] auto route_to_trajectory(const Route& route, const Mission& mission) -> dynamics::Trajectory;

/// Same, with explicit limits for the legs (the mission's horizon still applies).
[[nodiscard]] auto route_to_trajectory(const Route& route, const Mission& mission,
                                       const dynamics::KinematicLimits& leg_limits) -> dynamics::Trajectory;

/// Hold windows of the synthesized initial trajectory: sample ranges during
/// which the vehicle sits at a route vertex.
struct Hold {
  std::size_t vertex = 0;
  std::size_t first  = 0;
  std::size_t last   = 0;
};

/// A rest stop of the initial guess: reach `position` at rest and stay for
/// `hold_steps` steps. `vertex` is the graph vertex served, if any.
struct Waypoint {
  std::size_t vertex = 0;
  Vec3 position{};
  std::size_t hold_steps = 0;
};

/// Rest-to-rest legs from the depot through every waypoint, padded to the
/// mission horizon. Throws HorizonExceeded like route_to_trajectory.
[[nodiscard]] auto waypoints_to_trajectory(const std::vector<Waypoint>& waypoints, const Mission& mission,
                                           const dynamics::KinematicLimits& leg_limits) -> dynamics::Trajectory;

[[nodiscard]] auto route_holds(const Route& route, const Mission& mission,
                               const dynamics::KinematicLimits& leg_limits) -> std::vector<Hold>;

} // namespace ergoplan::routing

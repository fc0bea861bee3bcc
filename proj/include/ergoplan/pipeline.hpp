#pragma once

#include "ergoplan/error.hpp"
#include "ergoplan/mission.hpp"
#include "ergoplan/planner.hpp"
#include "ergoplan/routing.hpp"
#include "ergoplan/smooth.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace ergoplan::pipeline {

/// Leg limits tried for the initial guess, as fractions of the mission limits.
/// Below one the guess starts strictly inside the velocity bounds.
inline constexpr double kGuessLimitScales[] = {0.8, 0.9, 0.95, 1.0};

struct Options {
  smooth::SmoothConfig smooth;
  planner::OptimizerSettings optimizer;
  bool route_only = false;
  bool svg        = false;
  bool timing     = false; ///< record wall time in the report (breaks byte determinism)
  std::filesystem::path out_dir = ".";
  std::string stem              = "plan"; ///< output file names: <stem>.csv, <stem>.report.json, <stem>.svg
};

struct Outcome {
  planner::PlanResult result;
  std::vector<std::filesystem::path> written;
};

/// Routing solution and the rest-to-rest trajectory that visits it.
struct InitialGuess {
  routing::Route route;
  double route_cost = 0.0;
  planner::CompiledMission compiled;
  dynamics::Trajectory trajectory;
};

/// Stops of the route, with an extra stop inside each preferred approach box
/// just before the handover it belongs to.
[[nodiscard]] auto approach_waypoints(const routing::Route& route, const Mission& m) -> std::vector<routing::Waypoint>;

/// Solves the routing problem, then synthesizes rest-to-rest candidates (with
/// and without approach stops, at every leg limit scale) and keeps the one
/// with the highest exact robustness. Throws Infeasible, or HorizonExceeded
/// when no candidate fits the horizon.
[[nodiscard]] auto initial_guess(const Mission& m) -> InitialGuess;

/// route -> initial guess -> optimize (unless route_only) -> validate, then
/// writes the CSV, the report and optionally the SVG.
[[nodiscard]] auto run(const Mission& m, const Options& opt) -> Outcome;

/// 0 Satisfied, 2 Unsatisfied, 3 HorizonExceeded.
[[nodiscard]] auto exit_code(planner::Status s) -> int;
/// 3 for routing and horizon failures, 4 for mission document errors, 1 otherwise.
[[nodiscard]] auto exit_code(ErrorCode c) -> int;

} // namespace ergoplan::pipeline

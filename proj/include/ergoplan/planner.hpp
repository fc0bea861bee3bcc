#pragma once

#include "ergoplan/dynamics.hpp"
#include "ergoplan/mission.hpp"
#include "ergoplan/routing.hpp"
#include "ergoplan/smooth.hpp"
#include "ergoplan/stl.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ergoplan::planner {

struct LabeledFormula {
  std::string label;
  stl::Formula formula;
};

/// Mission formula together with the pieces it is assembled from.
///
/// Exact robustness of `formula` at sample 0 is the minimum of the exact
/// robustness of every entry of `parts` except "vel"; `objective` additionally
/// conjoins the velocity bounds and is what the optimizer and the validator
/// score.
struct CompiledMission {
  stl::Formula formula;
  stl::Formula objective;
  std::vector<LabeledFormula> parts;
  routing::Route route;
  std::size_t terminal_refill = 0; ///< index into Mission::refills
};

/// Solves the routing problem for the refill ordering, then compiles.
[[nodiscard]] auto compile_mission(const Mission& m) -> CompiledMission;
[[nodiscard]] auto compile_mission(const Mission& m, const routing::Route& route) -> CompiledMission;

/// Always over the horizon of |v_j| < v_max_j on every axis.
[[nodiscard]] auto velocity_bounds(const Mission& m) -> stl::Formula;

enum class Status { Satisfied, Unsatisfied, HorizonExceeded };

[[nodiscard]] auto to_string(Status s) -> std::string_view;

struct OptimizerSettings {
  double step_size  = 0.05; ///< initial step per iteration, m/s^2 along the normalized gradient
  std::size_t max_iters = 2000;
  double tol        = 1e-6; ///< stop when the smooth objective gains less than this
  std::uint64_t seed = 0;
  double perturbation = 0.0; ///< uniform jitter (m/s^2) applied to the initial controls
};

struct SubformulaValue {
  std::string label;
  double robustness = 0.0;
};

struct PlanResult {
  dynamics::Trajectory trajectory;
  double exact_robustness  = 0.0;
  double smooth_robustness = 0.0;
  std::vector<SubformulaValue> per_subformula;
  std::size_t iterations = 0;
  Status status          = Status::Unsatisfied;
  routing::Route route;
};

/// Projected gradient ascent of the smooth robustness over the acceleration
/// sequence (single shooting from the depot at rest). Returns the iterate with
/// the highest exact robustness seen.
[[nodiscard]] auto optimize(const Mission& m, const CompiledMission& compiled, const dynamics::Trajectory& initial,
                            const smooth::SmoothConfig& cfg, const OptimizerSettings& opt) -> PlanResult;
[[nodiscard]] auto optimize(const Mission& m, const dynamics::Trajectory& initial, const smooth::SmoothConfig& cfg,
                            const OptimizerSettings& opt) -> PlanResult;

/// Exact robustness of the objective and of every part; no optimization.
/// Throws GridMismatch when the trajectory is not on the mission grid.
[[nodiscard]] auto validate(const dynamics::Trajectory& traj, const Mission& m, const CompiledMission& compiled)
    -> PlanResult;
[[nodiscard]] auto validate(const dynamics::Trajectory& traj, const Mission& m) -> PlanResult;

/// Chain rule through the double-integrator rollout: trace gradient (sample
/// major, 6 entries per sample) to control gradient (3 per step).
[[nodiscard]] auto control_gradient(const std::vector<double>& trace_grad, std::size_t steps, double dt)
    -> std::vector<double>;

} // namespace ergoplan::planner

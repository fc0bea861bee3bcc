#include "ergoplan/planner.hpp"

#include "ergoplan/error.hpp"
#include "signal_graph.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace ergoplan::planner {

namespace {

using stl::Formula;
using stl::Interval;

auto label_at(const char* name, std::size_t i) -> std::string {
  return std::string{name} + "[" + std::to_string(i) + "]";
}

auto exact_graph(const Formula& f, const stl::TimedTrace& trace) -> detail::SignalGraph {
  return detail::SignalGraph(f, trace, 0, detail::Reduce{});
}

void check_grid(const dynamics::Trajectory& traj, const Mission& m) {
  const auto& tr = traj.trace;
  if (tr.size() != m.samples + 1 || std::abs(tr.dt() - m.dt) > 1e-12 || std::abs(tr.t0()) > 1e-12) {
    std::ostringstream os;
    os << "trajectory has " << tr.size() << " samples at dt = " << tr.dt() << " from t0 = " << tr.t0()
       << "; mission grid is " << m.samples + 1 << " samples at dt = " << m.dt << " from 0";
    throw Error(ErrorCode::GridMismatch, os.str());
  }
  if (traj.controls.size() != m.samples) {
    throw Error(ErrorCode::GridMismatch, "trajectory needs one control per step");
  }
}

auto evaluate_parts(const CompiledMission& compiled, const stl::TimedTrace& trace) -> std::vector<SubformulaValue> {
  std::vector<SubformulaValue> out;
  out.reserve(compiled.parts.size());
  for (const auto& part : compiled.parts) {
    out.push_back({part.label, stl::eval_robustness(part.formula, trace, 0)});
  }
  return out;
}

} // namespace

auto to_string(Status s) -> std::string_view {
  switch (s) {
    case Status::Satisfied: return "Satisfied";
    case Status::Unsatisfied: return "Unsatisfied";
    case Status::HorizonExceeded: return "HorizonExceeded";
  }
  return "Unsatisfied";
}

auto velocity_bounds(const Mission& m) -> Formula {
  std::vector<Formula> terms;
  static constexpr const char* kAxis[] = {"v1", "v2", "v3"};
  for (std::size_t j = 0; j < 3; ++j) {
    stl::StateVec upper{};
    upper[3 + j] = -1.0;
    terms.push_back(stl::predicate(stl::AffinePredicate::make(upper, m.limits.v_max[j], std::string("vmax-") + kAxis[j])));
    stl::StateVec lower{};
    lower[3 + j] = 1.0;
    terms.push_back(stl::predicate(stl::AffinePredicate::make(lower, m.limits.v_max[j], std::string(kAxis[j]) + "+vmax")));
  }
  return stl::always(Interval::make(0.0, m.t_total), stl::conjunction(std::move(terms)));
}

auto compile_mission(const Mission& m) -> CompiledMission {
  const auto graph = routing::build_graph(m);
  const auto sol   = routing::solve_ilp(graph);
  return compile_mission(m, routing::extract_route(sol, graph));
}

auto compile_mission(const Mission& m, const routing::Route& route) -> CompiledMission {
  const double t_n    = m.t_total;
  const double t_tail = m.t_refill; // terminal dwell at the refill station
  const double han_hi = t_n - t_tail - m.t_handover;
  if (han_hi < 0.0) {
    std::ostringstream os;
    os << "handover (" << m.t_handover << " s) plus terminal refill dwell (" << t_tail
       << " s) exceed the horizon of " << t_n << " s";
    throw Error(ErrorCode::HorizonTooShort, os.str());
  }
  const Interval whole  = Interval::make(0.0, t_n);
  const Interval hold_h = Interval::make(0.0, m.t_handover);
  const Interval hold_r = Interval::make(0.0, m.t_refill);

  CompiledMission out;
  out.route = route;

  std::vector<Formula> safety;
  std::vector<Formula> objectives;
  auto add_safety = [&](std::string label, Formula state) {
    safety.push_back(state);
    out.parts.push_back({std::move(label), stl::always(whole, std::move(state))});
  };
  auto add_objective = [&](std::string label, Formula f) {
    objectives.push_back(f);
    out.parts.push_back({std::move(label), std::move(f)});
  };

  add_safety("ws", stl::box_contains(m.workspace, "ws"));
  for (std::size_t i = 0; i < m.obstacles.size(); ++i) {
    add_safety(label_at("obs", i), stl::box_avoids(m.obstacles[i], label_at("obs", i)));
  }

  std::vector<Formula> in_handover;
  std::vector<std::vector<std::pair<std::string, Formula>>> preferences(m.operators.size());
  for (std::size_t i = 0; i < m.operators.size(); ++i) {
    const auto& op      = m.operators[i];
    const auto regions  = derive_regions(op);
    const auto behind   = clip_to(regions.behind, m.workspace);
    add_safety(label_at("beh", i), stl::box_avoids(behind, label_at("beh", i)));
    in_handover.push_back(stl::box_contains(op.handover_box, label_at("ho", i)));
    for (std::size_t k = 0; k < regions.approaches.size(); ++k) {
      const auto box        = clip_to(regions.approaches[k].second, m.workspace);
      const std::string lbl = label_at("pr", i) + "[" + std::to_string(k) + "]";
      preferences[i].emplace_back(lbl, stl::eventually(whole, stl::box_contains(box, lbl)));
    }
  }

  for (std::size_t i = 0; i < m.operators.size(); ++i) {
    add_objective(label_at("han", i),
                  stl::eventually(Interval::make(0.0, han_hi), stl::always(hold_h, in_handover[i])));
  }
  for (auto& per_op : preferences) {
    for (auto& [lbl, f] : per_op) { add_objective(lbl, f); }
  }

  // Route vertices: 0 depot, 1..tau operators, then refills.
  const std::size_t tau = m.operators.size();
  auto is_operator      = [&](std::size_t v) { return v >= 1 && v <= tau; };
  auto is_refill        = [&](std::size_t v) { return v > tau && v <= tau + m.refills.size(); };
  const auto& walk      = route.vertices;
  if (walk.empty() || !is_refill(walk.back())) {
    throw Error(ErrorCode::InvalidArgument, "route must end at a refill station");
  }
  out.terminal_refill = walk.back() - tau - 1;

  // Refill stop between two handovers: the first handover, then a refill
  // dwell, then the second handover, in that order.
  std::size_t cap_index = 0;
  for (std::size_t j = 1; j + 1 < walk.size(); ++j) {
    if (!is_refill(walk[j]) || !is_operator(walk[j - 1]) || !is_operator(walk[j + 1])) { continue; }
    const auto& refill = m.refills[walk[j] - tau - 1];
    const auto before  = walk[j - 1] - 1;
    const auto after   = walk[j + 1] - 1;
    const Formula third  = stl::always(hold_h, in_handover[after]);
    const Formula second = stl::conjunction(
        {stl::always(hold_r, stl::box_contains(refill, label_at("rs", walk[j] - tau - 1))), stl::eventually(whole, third)});
    const Formula first = stl::conjunction({stl::always(hold_h, in_handover[before]), stl::eventually(whole, second)});
    add_objective(label_at("cap", cap_index++), stl::eventually(whole, first));
  }

  const Formula terminal = stl::always(Interval::make(t_n - t_tail, t_n),
                                       stl::box_contains(m.refills[out.terminal_refill], "rs"));
  out.parts.push_back({"rs", terminal});

  const Formula velocity = velocity_bounds(m);
  out.parts.push_back({"vel", velocity});

  out.formula = stl::conjunction({stl::always(whole, stl::conjunction(safety)),
                                  stl::until(Interval::make(0.0, 0.0), stl::conjunction(objectives), terminal)});
  out.objective = stl::conjunction({out.formula, velocity});
  return out;
}

auto control_gradient(const std::vector<double>& trace_grad, std::size_t steps, double dt) -> std::vector<double> {
  std::vector<double> gu(steps * 3, 0.0);
  const double half_dt2 = 0.5 * dt * dt;
  for (std::size_t j = 0; j < 3; ++j) {
    double lp = 0.0;
    double lv = 0.0;
    for (std::size_t k = steps; k >= 1; --k) {
      lp += trace_grad[k * stl::kStateDim + j];
      lv += trace_grad[k * stl::kStateDim + 3 + j];
      gu[(k - 1) * 3 + j] = half_dt2 * lp + dt * lv;
      lv += dt * lp;
    }
  }
  return gu;
}

auto validate(const dynamics::Trajectory& traj, const Mission& m, const CompiledMission& compiled) -> PlanResult {
  check_grid(traj, m);
  PlanResult out{.trajectory = traj};
  out.exact_robustness = exact_graph(compiled.objective, traj.trace).value();
  out.per_subformula   = evaluate_parts(compiled, traj.trace);
  out.status           = out.exact_robustness > 0.0 ? Status::Satisfied : Status::Unsatisfied;
  out.route            = compiled.route;
  smooth::SmoothConfig cfg;
  out.smooth_robustness = smooth::eval_smooth(compiled.objective, traj.trace, 0, cfg);
  return out;
}

auto validate(const dynamics::Trajectory& traj, const Mission& m) -> PlanResult {
  return validate(traj, m, compile_mission(m));
}

auto optimize(const Mission& m, const dynamics::Trajectory& initial, const smooth::SmoothConfig& cfg,
              const OptimizerSettings& opt) -> PlanResult {
  return optimize(m, compile_mission(m), initial, cfg, opt);
}

auto optimize(const Mission& m, const CompiledMission& compiled, const dynamics::Trajectory& initial,
              const smooth::SmoothConfig& cfg, const OptimizerSettings& opt) -> PlanResult {
  cfg.validate();
  check_grid(initial, m);
  if (!(opt.step_size > 0.0)) { throw Error(ErrorCode::InvalidArgument, "optimizer step size must be positive"); }

  const dynamics::State x0{m.depot, {0.0, 0.0, 0.0}};
  const std::size_t steps = m.samples;
  const detail::Reduce smooth_reduce{.exact = false, .cfg = cfg};

  auto project = [&](dynamics::ControlSeq& u) {
    for (auto& a : u) {
      for (std::size_t j = 0; j < 3; ++j) { a[j] = std::clamp(a[j], -m.limits.a_max[j], m.limits.a_max[j]); }
    }
  };

  dynamics::ControlSeq u = initial.controls;
  if (opt.perturbation > 0.0) {
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> jitter(-opt.perturbation, opt.perturbation);
    for (auto& a : u) {
      for (auto& x : a) { x += jitter(rng); }
    }
  }
  project(u);

  // The graphs keep a reference to their trace, so trajectories live on the
  // heap and are handed over by pointer.
  auto traj  = std::make_unique<dynamics::Trajectory>(dynamics::rollout(x0, u, 0.0, m.dt));
  auto graph = std::make_unique<detail::SignalGraph>(compiled.objective, traj->trace, 0, smooth_reduce);
  double value = graph->value();

  dynamics::Trajectory best = *traj;
  double best_exact         = exact_graph(compiled.objective, traj->trace).value();

  std::size_t iter = 0;
  std::vector<double> trace_grad;
  while (iter < opt.max_iters) {
    ++iter;
    trace_grad.assign(traj->trace.size() * stl::kStateDim, 0.0);
    graph->backprop(trace_grad);
    const auto gu = control_gradient(trace_grad, steps, m.dt);
    double scale  = 0.0;
    for (double g : gu) { scale = std::max(scale, std::abs(g)); }
    if (!(scale > 0.0) || !std::isfinite(scale)) { break; }

    bool accepted = false;
    double gain   = 0.0;
    for (double alpha = opt.step_size; alpha >= opt.step_size * 1e-9; alpha *= 0.5) {
      dynamics::ControlSeq trial = u;
      for (std::size_t k = 0; k < steps; ++k) {
        for (std::size_t j = 0; j < 3; ++j) { trial[k][j] += alpha * gu[k * 3 + j] / scale; }
      }
      project(trial);
      auto trial_traj  = std::make_unique<dynamics::Trajectory>(dynamics::rollout(x0, trial, 0.0, m.dt));
      auto trial_graph = std::make_unique<detail::SignalGraph>(compiled.objective, trial_traj->trace, 0, smooth_reduce);
      if (trial_graph->value() > value) {
        gain     = trial_graph->value() - value;
        u        = std::move(trial);
        traj     = std::move(trial_traj);
        graph    = std::move(trial_graph);
        value    = graph->value();
        accepted = true;
        break;
      }
    }
    if (!accepted) { break; }
    const double exact = exact_graph(compiled.objective, traj->trace).value();
    if (exact > best_exact) {
      best_exact = exact;
      best       = *traj;
    }
    if (gain < opt.tol) { break; }
  }

  PlanResult out        = validate(best, m, compiled);
  out.smooth_robustness = smooth::eval_smooth(compiled.objective, best.trace, 0, cfg);
  out.iterations        = iter;
  return out;
}

} // namespace ergoplan::planner

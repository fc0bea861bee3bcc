#include "ergoplan/pipeline.hpp"

#include "ergoplan/io.hpp"

#include <chrono>
#include <cmath>
#include <optional>

namespace ergoplan::pipeline {

namespace {

// Point inside `approach`, a quarter of its depth away from the face it
// shares with `handover`.
auto entry_point(const Box3& approach, const Box3& handover) -> std::optional<Vec3> {
  for (std::size_t ax = 0; ax < 3; ++ax) {
    double face = 0.0;
    double side = 0.0;
    if (std::abs(approach.lo[ax] - handover.hi[ax]) < 1e-12) {
      face = handover.hi[ax];
      side = 1.0;
    } else if (std::abs(approach.hi[ax] - handover.lo[ax]) < 1e-12) {
      face = handover.lo[ax];
      side = -1.0;
    } else {
      continue;
    }
    Vec3 p = approach.center();
    p[ax]  = face + side * 0.25 * (approach.hi[ax] - approach.lo[ax]);
    return p;
  }
  return std::nullopt;
}

auto route_stops(const routing::Route& route, const Mission& m, bool with_approaches) -> std::vector<routing::Waypoint> {
  const auto g = routing::build_graph(m);
  auto steps   = [&](double seconds) { return static_cast<std::size_t>(std::ceil(seconds / m.dt - 1e-9)); };
  std::vector<routing::Waypoint> out;
  for (std::size_t i = 1; i < route.vertices.size(); ++i) {
    const auto v = route.vertices[i];
    switch (g.kind(v)) {
      case routing::VertexKind::Operator: {
        const auto& op = m.operators[v - 1];
        if (with_approaches) {
          for (const auto& [a, box] : derive_regions(op).approaches) {
            if (auto p = entry_point(clip_to(box, m.workspace), op.handover_box)) { out.push_back({v, *p, 0}); }
          }
        }
        out.push_back({v, g.vertices[v].position, steps(m.t_handover)});
        break;
      }
      case routing::VertexKind::Refill: out.push_back({v, g.vertices[v].position, steps(m.t_refill)}); break;
      case routing::VertexKind::Depot: out.push_back({v, g.vertices[v].position, 0}); break;
    }
  }
  return out;
}

} // namespace

auto approach_waypoints(const routing::Route& route, const Mission& m) -> std::vector<routing::Waypoint> {
  return route_stops(route, m, true);
}

auto initial_guess(const Mission& m) -> InitialGuess {
  const auto graph    = routing::build_graph(m);
  const auto sol      = routing::solve_ilp(graph);
  auto route          = routing::extract_route(sol, graph);
  auto compiled       = planner::compile_mission(m, route);

  std::optional<dynamics::Trajectory> best;
  double best_rho = 0.0;
  std::optional<Error> last_error;
  for (bool with_approaches : {true, false}) {
    const auto stops = route_stops(route, m, with_approaches);
    for (double scale : kGuessLimitScales) {
      Vec3 v{};
      Vec3 a{};
      for (std::size_t j = 0; j < 3; ++j) {
        v[j] = scale * m.limits.v_max[j];
        a[j] = scale * m.limits.a_max[j];
      }
      try {
        auto traj = routing::waypoints_to_trajectory(stops, m, dynamics::KinematicLimits::make(v, a));
        const double rho = stl::eval_robustness(compiled.objective, traj.trace, 0);
        if (!best || rho > best_rho) {
          best     = std::move(traj);
          best_rho = rho;
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::HorizonExceeded) { throw; }
        last_error = e;
      }
    }
  }
  if (!best) { throw *last_error; }
  return {std::move(route), sol.objective, std::move(compiled), std::move(*best)};
}

auto run(const Mission& m, const Options& opt) -> Outcome {
  const auto start = std::chrono::steady_clock::now();
  const auto guess = initial_guess(m);

  planner::PlanResult result =
      opt.route_only ? planner::validate(guess.trajectory, m, guess.compiled)
                     : planner::optimize(m, guess.compiled, guess.trajectory, opt.smooth, opt.optimizer);
  if (opt.route_only) {
    result.smooth_robustness = smooth::eval_smooth(guess.compiled.objective, guess.trajectory.trace, 0, opt.smooth);
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Outcome out{std::move(result), {}};
  std::filesystem::create_directories(opt.out_dir);
  auto emit = [&](const std::string& suffix, const std::string& content) {
    const auto path = opt.out_dir / (opt.stem + suffix);
    io::write_file_atomic(path, content);
    out.written.push_back(path);
  };
  io::ReportExtras extras;
  extras.smooth_mode = opt.smooth.mode == smooth::Mode::AGM ? "agm" : "lse";
  if (opt.timing) { extras.wall_time_s = elapsed; }
  emit(".csv", io::write_csv(out.result.trajectory));
  emit(".report.json", io::write_report(out.result, extras));
  if (opt.svg) { emit(".svg", io::emit_svg(out.result.trajectory, m)); }
  return out;
}

auto exit_code(planner::Status s) -> int {
  switch (s) {
    case planner::Status::Satisfied: return 0;
    case planner::Status::Unsatisfied: return 2;
    case planner::Status::HorizonExceeded: return 3;
  }
  return 1;
}

auto exit_code(ErrorCode c) -> int {
  switch (c) {
    case ErrorCode::Infeasible:
    case ErrorCode::HorizonExceeded:
    case ErrorCode::HorizonTooShort: return 3;
    case ErrorCode::ParseError:
    case ErrorCode::MissingField:
    case ErrorCode::BadBox:
    case ErrorCode::TimeInconsistent:
    case ErrorCode::RegionOutsideWorkspace: return 4;
    default: return 1;
  }
}

} // namespace ergoplan::pipeline

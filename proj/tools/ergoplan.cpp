#include "ergoplan/error.hpp"
#include "ergoplan/io.hpp"
#include "ergoplan/pipeline.hpp"
#include "ergoplan/planner.hpp"
#include "ergoplan/routing.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/cfg/helpers.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

namespace {

using namespace ergoplan;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("ergoplan");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("ERGOPLAN_LOG")) { spdlog::cfg::helpers::load_levels(env); }
}

// Mission document problems exit with 4 whatever their error class.
auto load_or_exit(const std::string& path, Mission& out) -> int {
  try {
    out = io::load_mission(path);
    return 0;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return 4;
  }
}

void log_result(const planner::PlanResult& r) {
  spdlog::info("status {} exact {} smooth {} after {} iterations", planner::to_string(r.status), r.exact_robustness,
               r.smooth_robustness, r.iterations);
  for (const auto& s : r.per_subformula) { spdlog::debug("  {} = {}", s.label, s.robustness); }
}

} // namespace

auto main(int argc, char** argv) -> int {
  setup_logging();
  CLI::App app{"Handover mission planner for a tool-delivering aerial vehicle"};
  app.require_subcommand(1);

  std::string mission_path;
  pipeline::Options opt;
  std::string smooth_mode = "agm";
  std::string out_dir     = ".";
  auto* plan = app.add_subcommand("plan", "route, optimize and validate a mission");
  plan->add_option("mission", mission_path, "mission document (JSON)")->required();
  plan->add_option("-o,--out", out_dir, "output directory");
  plan->add_option("--smooth", smooth_mode, "smooth semantics")->check(CLI::IsMember({"agm", "lse"}));
  plan->add_option("--beta", opt.smooth.beta, "LSE sharpness");
  plan->add_option("--max-iters", opt.optimizer.max_iters, "optimizer iteration cap");
  plan->add_option("--tol", opt.optimizer.tol, "stop when the smooth objective gains less than this");
  plan->add_option("--step", opt.optimizer.step_size, "initial step size");
  plan->add_option("--seed", opt.optimizer.seed, "seed for --perturb");
  plan->add_option("--perturb", opt.optimizer.perturbation, "uniform jitter of the initial controls (m/s^2)");
  plan->add_flag("--route-only", opt.route_only, "skip optimization, emit the initial guess");
  plan->add_flag("--svg", opt.svg, "also write a top-down SVG");
  plan->add_flag("--timing", opt.timing, "record wall time in the report");

  std::string csv_path;
  auto* check = app.add_subcommand("check", "validate a trajectory CSV against a mission");
  check->add_option("mission", mission_path, "mission document (JSON)")->required();
  check->add_option("trajectory", csv_path, "trajectory CSV")->required();

  auto* route = app.add_subcommand("route", "solve the routing problem and print the visiting order");
  route->add_option("mission", mission_path, "mission document (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  Mission m;
  if (const int rc = load_or_exit(mission_path, m); rc != 0) { return rc; }

  try {
    if (*plan) {
      opt.smooth.mode = smooth_mode == "lse" ? smooth::Mode::LSE : smooth::Mode::AGM;
      opt.smooth.validate();
      opt.out_dir = out_dir;
      opt.stem    = std::filesystem::path(mission_path).stem().string();
      const auto outcome = pipeline::run(m, opt);
      log_result(outcome.result);
      for (const auto& p : outcome.written) { std::cout << p.string() << "\n"; }
      return pipeline::exit_code(outcome.result.status);
    }
    if (*check) {
      const auto traj   = io::read_csv(io::read_file(csv_path), m);
      const auto result = planner::validate(traj, m);
      log_result(result);
      std::cout << io::write_report(result);
      return pipeline::exit_code(result.status);
    }
    const auto graph = routing::build_graph(m);
    const auto sol   = routing::solve_ilp(graph);
    const auto r     = routing::extract_route(sol, graph);
    nlohmann::json doc;
    doc["route"]     = r.vertices;
    doc["objective"] = sol.objective;
    std::cout << doc.dump(2) << "\n";
    return 0;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return pipeline::exit_code(e.code());
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
}

#pragma once

#include "ergoplan/dynamics.hpp"
#include "ergoplan/mission.hpp"
#include "ergoplan/planner.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Mission documents (JSON), trajectory CSV, robustness reports and SVG plots.

namespace ergoplan::io {

/// Parses and validates a mission document. Syntax errors raise ParseError
/// with line and column; absent keys raise MissingField naming the field path.
[[nodiscard]] auto parse_mission(std::string_view text) -> Mission;
[[nodiscard]] auto load_mission(const std::filesystem::path& path) -> Mission;

/// Inverse of parse_mission; numbers are written in shortest round-trip form.
[[nodiscard]] auto serialize_mission(const Mission& m) -> std::string;

/// atan2(v2, v1) per sample, held from the previous sample below 1e-6 m/s.
[[nodiscard]] auto heading_column(const stl::TimedTrace& trace) -> std::vector<double>;

/// Header t,p1,p2,p3,v1,v2,v3,a1,a2,a3,heading and one row per sample. The
/// last row repeats the last control.
[[nodiscard]] auto write_csv(const dynamics::Trajectory& traj) -> std::string;

/// Reads a CSV produced by write_csv back onto the mission grid. Throws
/// ParseError for malformed rows and GridMismatch when the time column does
/// not match the mission's N and dt.
[[nodiscard]] auto read_csv(std::string_view text, const Mission& m) -> dynamics::Trajectory;

struct ReportExtras {
  std::string smooth_mode = "agm";
  std::optional<double> wall_time_s; ///< omitted from the document when empty
};

[[nodiscard]] auto write_report(const planner::PlanResult& result, const ReportExtras& extras = {}) -> std::string;

/// Top-down view (p1, p2): workspace, obstacles, operators (handover, behind
/// and approach boxes), refills and the trajectory polyline, one group each.
[[nodiscard]] auto emit_svg(const dynamics::Trajectory& traj, const Mission& m) -> std::string;

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

[[nodiscard]] auto read_file(const std::filesystem::path& path) -> std::string;

} // namespace ergoplan::io

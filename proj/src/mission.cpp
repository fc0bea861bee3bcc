#include "ergoplan/mission.hpp"

#include "ergoplan/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

namespace ergoplan {

namespace {

void check_box(const Box3& b, const std::string& where) {
  for (std::size_t j = 0; j < 3; ++j) {
    if (!std::isfinite(b.lo[j]) || !std::isfinite(b.hi[j]) || !(b.lo[j] < b.hi[j])) {
      std::ostringstream os;
      os << where << ": lo[" << j << "] = " << b.lo[j] << " is not below hi[" << j << "] = " << b.hi[j];
      throw Error(ErrorCode::BadBox, os.str());
    }
  }
}

void check_inside(const Box3& b, const Box3& ws, const std::string& where) {
  if (!b.inside(ws)) { throw Error(ErrorCode::RegionOutsideWorkspace, where + " extends outside the workspace"); }
}

auto indexed(const char* name, std::size_t i) -> std::string {
  return std::string{name} + "[" + std::to_string(i) + "]";
}

} // namespace

auto to_string(Approach a) -> std::string_view {
  switch (a) {
    case Approach::Front: return "front";
    case Approach::Left: return "left";
    case Approach::Right: return "right";
    case Approach::Above: return "above";
    case Approach::Below: return "below";
  }
  return "front";
}

auto approach_from_string(std::string_view name) -> Approach {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (auto a : {Approach::Front, Approach::Left, Approach::Right, Approach::Above, Approach::Below}) {
    if (lower == to_string(a)) { return a; }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown approach direction '" + std::string(name) + "'");
}

void validate_mission(const Mission& m) {
  check_box(m.workspace, "workspace");
  for (std::size_t i = 0; i < m.obstacles.size(); ++i) {
    check_box(m.obstacles[i], indexed("obstacles", i));
    check_inside(m.obstacles[i], m.workspace, indexed("obstacles", i));
  }
  if (m.operators.empty()) { throw Error(ErrorCode::MissingField, "operators: at least one operator required"); }
  if (m.refills.empty()) { throw Error(ErrorCode::MissingField, "refills: at least one refill station required"); }

  auto check_clear = [&](const Box3& b, const std::string& where) {
    for (std::size_t k = 0; k < m.obstacles.size(); ++k) {
      if (b.overlaps(m.obstacles[k])) {
        throw Error(ErrorCode::InvalidArgument, where + " intersects " + indexed("obstacles", k));
      }
    }
  };

  for (std::size_t i = 0; i < m.operators.size(); ++i) {
    const auto& op        = m.operators[i];
    const std::string where = indexed("operators", i);
    check_box(op.handover_box, where + ".box");
    check_inside(op.handover_box, m.workspace, where + ".box");
    check_clear(op.handover_box, where + ".box");
    if (!(op.heading > -std::numbers::pi) || op.heading > std::numbers::pi) {
      throw Error(ErrorCode::InvalidArgument, where + ".heading_rad must lie in (-pi, pi]");
    }
    if (op.preferred_approaches.empty()) {
      throw Error(ErrorCode::MissingField, where + ".preferences must list at least one direction");
    }
    if (!(op.approach_box_depth > 0.0) || !(op.behind_box_depth > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, where + ": region depths must be positive");
    }
  }
  for (std::size_t i = 0; i < m.refills.size(); ++i) {
    check_box(m.refills[i], indexed("refills", i));
    check_inside(m.refills[i], m.workspace, indexed("refills", i));
    check_clear(m.refills[i], indexed("refills", i));
  }
  for (std::size_t j = 0; j < 3; ++j) {
    if (!(m.depot[j] > m.workspace.lo[j] && m.depot[j] < m.workspace.hi[j])) {
      throw Error(ErrorCode::RegionOutsideWorkspace, "depot lies outside the workspace");
    }
  }
  if (m.capacity < 1) { throw Error(ErrorCode::InvalidArgument, "capacity must be a positive integer"); }

  if (!(m.dt > 0.0) || m.samples == 0) {
    throw Error(ErrorCode::TimeInconsistent, "times: dt and sample count must be positive");
  }
  if (std::abs(static_cast<double>(m.samples) * m.dt - m.t_total) > 1e-9) {
    std::ostringstream os;
    os << "times: N * dt = " << static_cast<double>(m.samples) * m.dt << " differs from t_total = " << m.t_total;
    throw Error(ErrorCode::TimeInconsistent, os.str());
  }
  if (!(m.t_handover > 0.0 && m.t_handover < m.t_total)) {
    throw Error(ErrorCode::TimeInconsistent, "times.t_handover must lie in (0, t_total)");
  }
  if (!(m.t_refill > 0.0 && m.t_refill < m.t_total)) {
    throw Error(ErrorCode::TimeInconsistent, "times.t_refill must lie in (0, t_total)");
  }
  (void)dynamics::KinematicLimits::make(m.limits.v_max, m.limits.a_max);
}

auto snap_heading(double heading) -> std::pair<std::size_t, double> {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  // Ties (exact diagonals) resolve to the x axis.
  if (std::abs(c) >= std::abs(s)) { return {0, c >= 0.0 ? 1.0 : -1.0}; }
  return {1, s >= 0.0 ? 1.0 : -1.0};
}

auto derive_regions(const OperatorSpec& op) -> OperatorRegions {
  const Box3& ho = op.handover_box;
  // Box sharing the face of `ho` on side (axis, sign), `depth` thick.
  auto abut = [&](std::size_t axis, double sign, double depth) {
    Box3 b = ho;
    if (sign > 0.0) {
      b.lo[axis] = ho.hi[axis];
      b.hi[axis] = ho.hi[axis] + depth;
    } else {
      b.hi[axis] = ho.lo[axis];
      b.lo[axis] = ho.lo[axis] - depth;
    }
    return b;
  };

  const auto [axis, sign] = snap_heading(op.heading);
  // Left is the heading rotated by +90 degrees about +z.
  const std::size_t lateral = axis == 0 ? 1 : 0;
  const double left_sign    = axis == 0 ? sign : -sign;

  OperatorRegions out;
  out.behind = abut(axis, -sign, op.behind_box_depth);
  for (auto a : op.preferred_approaches) {
    Box3 b;
    switch (a) {
      case Approach::Front: b = abut(axis, sign, op.approach_box_depth); break;
      case Approach::Left: b = abut(lateral, left_sign, op.approach_box_depth); break;
      case Approach::Right: b = abut(lateral, -left_sign, op.approach_box_depth); break;
      case Approach::Above: b = abut(2, 1.0, op.approach_box_depth); break;
      case Approach::Below: b = abut(2, -1.0, op.approach_box_depth); break;
    }
    out.approaches.emplace_back(a, b);
  }
  return out;
}

auto clip_to(const Box3& box, const Box3& workspace) -> Box3 {
  Box3 out;
  for (std::size_t j = 0; j < 3; ++j) {
    out.lo[j] = std::max(box.lo[j], workspace.lo[j]);
    out.hi[j] = std::min(box.hi[j], workspace.hi[j]);
    if (!(out.lo[j] < out.hi[j])) {
      std::ostringstream os;
      os << "region collapses on axis " << j + 1 << " after clipping to the workspace";
      throw Error(ErrorCode::DegenerateRegion, os.str());
    }
  }
  return out;
}

} // namespace ergoplan

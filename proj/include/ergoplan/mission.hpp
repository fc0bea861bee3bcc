#pragma once

#include "ergoplan/dynamics.hpp"
#include "ergoplan/stl.hpp"

#include <cstddef>
#include <string_view>
#include <vector>

namespace ergoplan {

using stl::Box3;
using stl::Vec3;

/// Sides of a handover region relative to the operator's heading.
enum class Approach { Front, Left, Right, Above, Below };

[[nodiscard]] auto to_string(Approach a) -> std::string_view;
/// Case-insensitive; throws InvalidArgument for unknown names (including "behind").
[[nodiscard]] auto approach_from_string(std::string_view name) -> Approach;

struct OperatorSpec {
  Box3 handover_box;
  double heading = 0.0; ///< radians in (-pi, pi]; 0 faces +x
  std::vector<Approach> preferred_approaches;
  double approach_box_depth = 2.0; ///< meters
  double behind_box_depth   = 2.0; ///< meters

  friend auto operator==(const OperatorSpec&, const OperatorSpec&) -> bool = default;
};

struct Mission {
  Box3 workspace;
  std::vector<Box3> obstacles;
  std::vector<OperatorSpec> operators;
  std::vector<Box3> refills;
  Vec3 depot{};
  int capacity = 1;
  double t_total    = 0.0; ///< t_N, seconds
  double t_handover = 0.0; ///< seconds
  double t_refill   = 0.0; ///< seconds
  double dt         = 0.05;
  std::size_t samples = 0; ///< N
  dynamics::KinematicLimits limits;

  friend auto operator==(const Mission&, const Mission&) -> bool = default;
};

/// Checks every Mission invariant, throwing the matching ErrorCode with a
/// field-addressed message (e.g. "operators[1].box").
void validate_mission(const Mission& m);

/// Regions derived from an operator's heading. Boxes are not yet clipped.
struct OperatorRegions {
  Box3 behind;
  std::vector<std::pair<Approach, Box3>> approaches;
};

/// Heading snapped to the nearest horizontal axis: returns (axis, sign), axis in {0, 1}.
[[nodiscard]] auto snap_heading(double heading) -> std::pair<std::size_t, double>;

[[nodiscard]] auto derive_regions(const OperatorSpec& op) -> OperatorRegions;

/// Intersection with the workspace; DegenerateRegion when nothing of positive
/// extent is left.
[[nodiscard]] auto clip_to(const Box3& box, const Box3& workspace) -> Box3;

} // namespace ergoplan

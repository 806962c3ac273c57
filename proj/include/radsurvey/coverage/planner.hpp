#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radsurvey/coverage/boustrophedon.hpp"
#include "radsurvey/coverage/visibility.hpp"
#include "radsurvey/geo/types.hpp"

namespace radsurvey::coverage {

enum class SegmentKind { Survey, Connector };
std::string to_string(SegmentKind k);

struct CoveragePlan {
  std::vector<int> cell_order;
  geo::Trajectory waypoints;
  std::vector<SegmentKind> segment_kinds;  // one per consecutive waypoint pair
  double line_spacing = 0.0;
  double survey_length = 0.0;
  double connector_length = 0.0;
};

/// Survey line offsets across a cell spanning [y_lo, y_hi] in the sweep frame.
std::vector<double> line_offsets(double y_lo, double y_hi, double spacing);

/// Zig-zag through the ordered cells. Each cell starts at the corner nearest
/// the previous exit (the entry point for the first cell). Transitions are
/// straight when `space` allows, otherwise shortest visibility paths.
CoveragePlan coverage_trajectory(const CellDecomposition& dec, const std::vector<int>& order, double line_spacing,
                                 geo::Point2 entry, const VisibilityGraph& graph);

/// Convenience overload using the union of the cell polygons as free space.
CoveragePlan coverage_trajectory(const CellDecomposition& dec, const std::vector<int>& order, double line_spacing,
                                 geo::Point2 entry);

struct CoverageConfig {
  double line_spacing = 2.0;
  double clearance = 0.25;           // m kept from the region boundary and holes
  std::optional<double> sweep_dir;   // radians; empty selects automatically
  double speed = 0.5;
  double sampling_period = 1.0;
};

/// Region minus clearance: envelope eroded, holes dilated (mitred offsets).
std::vector<geo::RegionPolygon> free_space_parts(const geo::RegionPolygon& region, double clearance);

struct RegionPlan {
  geo::RegionPolygon region;
  std::vector<geo::RegionPolygon> free_space;
  double clearance = 0.0;  // applied clearance (0 after fallback)
  CellDecomposition decomposition;
  CoveragePlan plan;
};

/// Free space, decomposition (start cell nearest the entry), ordering and
/// trajectory for one region. Falls back to zero clearance when the
/// clearance leaves no room or disconnects the plan.
RegionPlan plan_region(const geo::RegionPolygon& region, const CoverageConfig& cfg, geo::Point2 entry);

/// Reversed traversal of a plan.
CoveragePlan reversed(const CoveragePlan& plan);

nlohmann::json region_plan_to_json(const RegionPlan& p);
RegionPlan region_plan_from_json(const nlohmann::json& j);

}  // namespace radsurvey::coverage

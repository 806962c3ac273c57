#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radsurvey/geo/types.hpp"

namespace radsurvey::route {

/// Chebyshev dilation of the occupied set by `cells`.
geo::BinaryGrid inflate(const geo::BinaryGrid& grid, int cells);

struct GridPath {
  std::vector<geo::CellIndex> cells;
  double cost = 0.0;    // in cells: 1 per straight step, sqrt(2) per diagonal
  double length = 0.0;  // meters
};

/// 8-connected A* without corner cutting, octile heuristic. Throws
/// Unreachable when no path exists and Config when an endpoint is occupied.
GridPath astar(const geo::BinaryGrid& grid, geo::CellIndex start, geo::CellIndex goal);

/// Nearest free cell to a world point (ties: lowest row, then column).
geo::CellIndex nearest_free_cell(const geo::BinaryGrid& grid, geo::Point2 p);

struct Endpoints {
  geo::Point2 entry;
  geo::Point2 exit;
};

struct Leg {
  std::string from, to;
  std::vector<geo::Point2> polyline;
  double length = 0.0;
};

struct RoutePlan {
  std::vector<Leg> legs;
  double total_length = 0.0;
  int chosen_unload = -1;
  geo::Point2 unload_point;
  std::vector<int> roi_order;
  std::vector<bool> reversed;  // per ROI index: traversed exit -> entry
};

struct RouteOptions {
  bool allow_reverse = true;
};

/// Exhaustive search over unloading candidate x ROI order x per-ROI direction.
/// Leg polylines run from the world endpoint through the interior cell
/// centers to the world endpoint; their length is the grid cost times the
/// cell size. Points are snapped to their nearest free cell.
RoutePlan plan_routes(const geo::BinaryGrid& grid, const std::vector<geo::Point2>& unload_candidates,
                      const std::vector<Endpoints>& rois, const RouteOptions& opts = {});

nlohmann::json route_plan_to_json(const RoutePlan& p);

}  // namespace radsurvey::route

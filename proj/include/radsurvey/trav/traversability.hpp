#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "radsurvey/geo/types.hpp"

namespace radsurvey::trav {

struct ObstacleConfig {
  double max_slope_deg = 16.0;  // theta_max
  double max_step = 0.16;       // h_max, m
  double pixel_size = 0.5;      // m, integer multiple of the DEM cell size
};

struct ObstacleMap {
  geo::BinaryGrid grid;
  std::vector<float> violation_fraction;  // share of violating cell pairs, display only
};

/// A pixel is an obstacle when any pair of DEM cells inside its block,
/// widened by a one-cell border, has |dh| > max(tan(theta_max) * dd, h_max),
/// dd being the horizontal distance between the cell centers.
ObstacleMap obstacle_map(const geo::Dem& dem, const ObstacleConfig& cfg);

enum Provenance : std::uint8_t {
  kTerrain = 1,
  kOutsideRoi = 2,
  kManual = 4,
};

struct FusedMap {
  geo::BinaryGrid grid;                 // occupied = not mappable
  std::vector<std::uint8_t> provenance; // Provenance bits per cell
};

/// Cellwise OR on the ROI grid; obstacle cells are looked up by nearest cell
/// (ROI cells beyond the obstacle extent count as terrain obstacles).
FusedMap fuse_maps(const geo::BinaryGrid& roi, const geo::BinaryGrid& obstacles);

/// Occupies the cells whose centers fall inside any polygon.
FusedMap apply_manual_obstacles(const FusedMap& fused, const std::vector<geo::RegionPolygon>& polys);

/// ROI mask on the given geometry: occupied outside every ROI polygon.
geo::BinaryGrid roi_grid(const geo::GridGeometry& g, const std::vector<geo::RegionPolygon>& rois);

/// Occupancy restricted to terrain and manual provenance.
geo::BinaryGrid obstacle_layer(const FusedMap& fused);

struct RegionConfig {
  double min_area = 0.0;  // m^2; <= 0 means four cells
  int max_vertices = 48;  // per ring
};

/// One polygon per 8-connected free component with enough area; holes from
/// enclosed occupied sets. Rings are simplified to the vertex budget, raising
/// the budget for a ring whose simplification would make the polygon invalid.
std::vector<geo::RegionPolygon> extract_regions(const FusedMap& fused, const RegionConfig& cfg);

nlohmann::json fused_map_to_json(const FusedMap& m);
FusedMap fused_map_from_json(const nlohmann::json& j);
nlohmann::json obstacle_map_to_json(const ObstacleMap& m);

}  // namespace radsurvey::trav

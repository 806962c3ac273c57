#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radsurvey/geo/types.hpp"

namespace radsurvey::geo {

using nlohmann::json;

// DEM: {origin_x, origin_y, cell_size, rows, cols, heights: [row-major]}.
json dem_to_json(const Dem& dem);
Dem dem_from_json(const json& j);
/// ESRI ASCII grid (ncols/nrows/xllcorner|xllcenter/yllcorner|yllcenter/
/// cellsize[/nodata_value] then rows north to south).
Dem dem_from_ascii_grid(const std::string& text);
/// Dispatches on content: JSON object or ASCII grid.
Dem load_dem(const std::filesystem::path& path);

json geometry_to_json(const GridGeometry& g);
GridGeometry geometry_from_json(const json& j);

// Polygon: {envelope: [[x,y],...], holes: [[[x,y],...],...]}.
json ring_to_json(const Ring& ring);
Ring ring_from_json(const json& j);
json polygon_to_json(const RegionPolygon& p);
RegionPolygon polygon_from_json(const json& j);
/// Accepts a single polygon object or an array of them.
std::vector<RegionPolygon> polygons_from_json(const json& j);

// BinaryGrid: geometry header + rle: per row, alternating run lengths
// starting with a free run (which may be 0).
json binary_grid_to_json(const BinaryGrid& grid);
BinaryGrid binary_grid_from_json(const json& j);

// GridMap: geometry header + no_data sentinel + row-major values.
inline constexpr double kNoDataSentinel = -9999.0;
json grid_map_to_json(const GridMap& grid);
GridMap grid_map_from_json(const json& j);

// Trajectory: {speed, sampling_period, waypoints: [[x,y,z],...]}.
json trajectory_to_json(const Trajectory& t);
Trajectory trajectory_from_json(const json& j);

std::string read_text_file(const std::filesystem::path& path);
json read_json_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
void write_json_file(const std::filesystem::path& path, const json& j);

}  // namespace radsurvey::geo

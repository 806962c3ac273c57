#include "radsurvey/geo/types.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "radsurvey/error.hpp"

namespace radsurvey::geo {

std::optional<CellIndex> GridGeometry::cell_of(double x, double y) const {
  if (!contains(x, y)) return std::nullopt;
  int col = static_cast<int>(std::floor((x - origin_x) / cell_size));
  int row = static_cast<int>(std::floor((y - origin_y) / cell_size));
  col = std::clamp(col, 0, cols - 1);
  row = std::clamp(row, 0, rows - 1);
  return CellIndex{row, col};
}

void GridGeometry::validate() const {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) fail(ErrorCode::Config, "cell_size must be positive");
  if (rows <= 0 || cols <= 0) fail(ErrorCode::Config, "rows and cols must be positive");
  if (!std::isfinite(origin_x) || !std::isfinite(origin_y)) fail(ErrorCode::Config, "origin must be finite");
}

Dem::Dem(GridGeometry geometry, std::vector<double> heights)
    : geometry_(geometry), heights_(std::move(heights)) {
  geometry_.validate();
  if (heights_.size() != geometry_.size())
    fail(ErrorCode::Config, "DEM has " + std::to_string(heights_.size()) + " heights, expected " +
                                std::to_string(geometry_.size()));
  if (!std::all_of(heights_.begin(), heights_.end(), [](double h) { return std::isfinite(h); }))
    fail(ErrorCode::Config, "DEM heights must be finite");
}

std::size_t BinaryGrid::count_occupied() const {
  return static_cast<std::size_t>(std::count(occupied.begin(), occupied.end(), std::uint8_t{1}));
}

double Trajectory::length_2d() const {
  double total = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i)
    total += distance(waypoints[i - 1].xy(), waypoints[i].xy());
  return total;
}

double Trajectory::length_3d() const {
  double total = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    const auto& a = waypoints[i - 1];
    const auto& b = waypoints[i];
    total += std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
  }
  return total;
}

void Trajectory::validate() const {
  if (waypoints.size() < 2) fail(ErrorCode::Validity, "trajectory needs at least 2 waypoints");
  if (!(speed > 0.0)) fail(ErrorCode::Validity, "trajectory speed must be positive");
  if (!(sampling_period > 0.0)) fail(ErrorCode::Validity, "sampling period must be positive");
}

}  // namespace radsurvey::geo

#pragma once

#include <vector>

#include "radsurvey/geo/types.hpp"

namespace radsurvey::coverage {

/// Free space for connector planning: either the union of `regions`
/// (bounded) or the whole plane, minus the interiors of `blockers`.
/// Boundaries belong to free space.
struct FreeSpace {
  bool bounded = false;
  std::vector<geo::RegionPolygon> regions;
  std::vector<geo::RegionPolygon> blockers;

  bool point_free(geo::Point2 p) const;
  /// Free iff the endpoints are free and every piece between consecutive
  /// boundary crossings has a free midpoint.
  bool segment_free(geo::Point2 a, geo::Point2 b) const;
};

/// Visibility graph over the reflex vertices of a free space.
class VisibilityGraph {
 public:
  explicit VisibilityGraph(FreeSpace space);

  const FreeSpace& space() const { return space_; }
  const std::vector<geo::Point2>& nodes() const { return nodes_; }

  /// Shortest free polyline from a to b (inclusive). Throws Unreachable.
  std::vector<geo::Point2> shortest_path(geo::Point2 a, geo::Point2 b) const;

 private:
  FreeSpace space_;
  std::vector<geo::Point2> nodes_;
  std::vector<std::vector<std::pair<int, double>>> adj_;
};

/// Shortest path from a to b around obstacles dilated by `clearance`
/// (mitred vertex offsetting). Throws Unreachable when a or b lies inside a
/// dilated obstacle or no path exists.
std::vector<geo::Point2> visibility_path(geo::Point2 a, geo::Point2 b, const std::vector<geo::RegionPolygon>& obstacles,
                                         double clearance);

double polyline_length(const std::vector<geo::Point2>& path);

}  // namespace radsurvey::coverage

#pragma once

#include <array>
#include <optional>
#include <vector>

#include "radsurvey/geo/types.hpp"

namespace radsurvey::gridding {

struct Triangulation {
  std::vector<geo::Point2> points;            // deduplicated input points
  std::vector<double> values;                 // per point (duplicates averaged)
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise
};

/// Bowyer-Watson Delaunay triangulation. Coincident points are merged and
/// their values averaged. Throws Geometry for < 3 distinct or collinear points.
Triangulation delaunay(const std::vector<geo::Point2>& points, const std::vector<double>& values);

/// Grid covering the bounding box of the points with the given cell size,
/// origin snapped down to a multiple of the cell size.
geo::GridGeometry covering_geometry(const std::vector<geo::Point2>& points, double cell_size);

/// Piecewise-linear interpolation of the triangulation at every cell center;
/// cells outside the triangulated hull are no_data.
geo::GridMap rasterize(const Triangulation& tri, const geo::GridGeometry& g);

}  // namespace radsurvey::gridding

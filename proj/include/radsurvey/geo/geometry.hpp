#pragma once

#include <span>

#include "radsurvey/geo/types.hpp"

namespace radsurvey::geo {

enum class SampleMode { Bilinear, Nearest };

/// Terrain height at (x, y). Bilinear between cell centers, clamped to the
/// outermost centers within half a cell of the extent border. Throws Extent
/// for queries outside the DEM extent.
double dem_sample(const Dem& dem, double x, double y, SampleMode mode = SampleMode::Bilinear);

/// Signed shoelace area, positive for counter-clockwise rings.
double signed_area(std::span<const Point2> ring);
double ring_area(std::span<const Point2> ring);
Point2 ring_centroid(std::span<const Point2> ring);

/// Envelope area minus hole areas. Throws Validity for rings with < 3 vertices.
double polygon_area(const RegionPolygon& p);

/// Boundary points count as inside.
bool point_in_ring(std::span<const Point2> ring, Point2 p);
/// Inside the envelope and outside every hole; hole boundaries count as inside.
bool point_in_region(const RegionPolygon& p, double x, double y);

/// Distance from p to segment ab.
double point_segment_distance(Point2 p, Point2 a, Point2 b);
/// Smallest distance from p to any edge of the ring.
double point_ring_distance(std::span<const Point2> ring, Point2 p);

bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d);

struct BBox {
  double min_x, min_y, max_x, max_y;
};
BBox bounding_box(std::span<const Point2> ring);

/// Reorients envelope counter-clockwise and holes clockwise.
void normalize_orientation(RegionPolygon& p);

/// Rotates all coordinates by `angle` radians about the origin.
Point2 rotate(Point2 p, double angle);
Ring rotate(std::span<const Point2> ring, double angle);
RegionPolygon rotate(const RegionPolygon& p, double angle);

}  // namespace radsurvey::geo

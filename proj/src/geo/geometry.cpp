#include "radsurvey/geo/geometry.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "radsurvey/error.hpp"

namespace radsurvey::geo {

double dem_sample(const Dem& dem, double x, double y, SampleMode mode) {
  const auto& g = dem.geometry();
  if (!g.contains(x, y))
    fail(ErrorCode::Extent, "DEM query (" + std::to_string(x) + ", " + std::to_string(y) + ") outside extent");

  // Continuous cell coordinates with cell centers at integers.
  const double u = (x - g.origin_x) / g.cell_size - 0.5;
  const double v = (y - g.origin_y) / g.cell_size - 0.5;

  if (mode == SampleMode::Nearest) {
    const int col = std::clamp(static_cast<int>(std::lround(u)), 0, g.cols - 1);
    const int row = std::clamp(static_cast<int>(std::lround(v)), 0, g.rows - 1);
    return dem.at(row, col);
  }

  const double uc = std::clamp(u, 0.0, static_cast<double>(g.cols - 1));
  const double vc = std::clamp(v, 0.0, static_cast<double>(g.rows - 1));
  const int c0 = std::min(static_cast<int>(std::floor(uc)), std::max(g.cols - 2, 0));
  const int r0 = std::min(static_cast<int>(std::floor(vc)), std::max(g.rows - 2, 0));
  const int c1 = std::min(c0 + 1, g.cols - 1);
  const int r1 = std::min(r0 + 1, g.rows - 1);
  const double fu = uc - c0;
  const double fv = vc - r0;
  const double h00 = dem.at(r0, c0);
  const double h01 = dem.at(r0, c1);
  const double h10 = dem.at(r1, c0);
  const double h11 = dem.at(r1, c1);
  return (1.0 - fv) * ((1.0 - fu) * h00 + fu * h01) + fv * ((1.0 - fu) * h10 + fu * h11);
}

double signed_area(std::span<const Point2> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return 0.0;
  // Shoelace relative to the first vertex keeps cancellation small for
  // rings far from the origin.
  const Point2 o = ring[0];
  double twice = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) twice += cross(ring[i] - o, ring[i + 1] - o);
  return 0.5 * twice;
}

double ring_area(std::span<const Point2> ring) { return std::abs(signed_area(ring)); }

Point2 ring_centroid(std::span<const Point2> ring) {
  const std::size_t n = ring.size();
  if (n == 0) return {};
  const Point2 o = ring[0];
  double a = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const Point2 p = ring[i] - o;
    const Point2 q = ring[i + 1] - o;
    const double w = cross(p, q);
    a += w;
    cx += (p.x + q.x) * w;
    cy += (p.y + q.y) * w;
  }
  if (std::abs(a) < 1e-300) {
    Point2 mean{};
    for (const auto& p : ring) mean = mean + p;
    return (1.0 / static_cast<double>(n)) * mean;
  }
  return {o.x + cx / (3.0 * a), o.y + cy / (3.0 * a)};
}

double polygon_area(const RegionPolygon& p) {
  if (p.envelope.size() < 3) fail(ErrorCode::Validity, "envelope needs at least 3 vertices");
  double area = ring_area(p.envelope);
  for (const auto& hole : p.holes) {
    if (hole.size() < 3) fail(ErrorCode::Validity, "hole needs at least 3 vertices");
    area -= ring_area(hole);
  }
  return std::max(area, 0.0);
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 <= 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

double point_ring_distance(std::span<const Point2> ring, Point2 p) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) best = std::min(best, point_segment_distance(p, ring[i], ring[(i + 1) % n]));
  return best;
}

bool point_in_ring(std::span<const Point2> ring, Point2 p) {
  const std::size_t n = ring.size();
  if (n < 3) return false;
  // Boundary test first so edges and vertices count as inside.
  const double scale = 1.0 + std::abs(p.x) + std::abs(p.y);
  if (point_ring_distance(ring, p) <= 1e-12 * scale) return true;
  // Winding number.
  int winding = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = ring[i];
    const Point2 b = ring[(i + 1) % n];
    if (a.y <= p.y) {
      if (b.y > p.y && cross(b - a, p - a) > 0.0) ++winding;
    } else {
      if (b.y <= p.y && cross(b - a, p - a) < 0.0) --winding;
    }
  }
  return winding != 0;
}

bool point_in_region(const RegionPolygon& p, double x, double y) {
  const Point2 q{x, y};
  if (!point_in_ring(p.envelope, q)) return false;
  for (const auto& hole : p.holes) {
    if (!point_in_ring(hole, q)) continue;
    const double scale = 1.0 + std::abs(x) + std::abs(y);
    if (point_ring_distance(hole, q) > 1e-12 * scale) return false;
  }
  return true;
}

namespace {
int orientation_sign(Point2 a, Point2 b, Point2 c) {
  const double v = cross(b - a, c - a);
  const double scale = (std::abs(b.x - a.x) + std::abs(b.y - a.y)) * (std::abs(c.x - a.x) + std::abs(c.y - a.y));
  if (std::abs(v) <= 1e-14 * scale) return 0;
  return v > 0.0 ? 1 : -1;
}

bool on_segment(Point2 a, Point2 b, Point2 p) {
  return std::min(a.x, b.x) - 1e-12 <= p.x && p.x <= std::max(a.x, b.x) + 1e-12 &&
         std::min(a.y, b.y) - 1e-12 <= p.y && p.y <= std::max(a.y, b.y) + 1e-12;
}
}  // namespace

bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
  const int o1 = orientation_sign(a, b, c);
  const int o2 = orientation_sign(a, b, d);
  const int o3 = orientation_sign(c, d, a);
  const int o4 = orientation_sign(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

BBox bounding_box(std::span<const Point2> ring) {
  BBox box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& p : ring) {
    box.min_x = std::min(box.min_x, p.x);
    box.min_y = std::min(box.min_y, p.y);
    box.max_x = std::max(box.max_x, p.x);
    box.max_y = std::max(box.max_y, p.y);
  }
  return box;
}

void normalize_orientation(RegionPolygon& p) {
  if (signed_area(p.envelope) < 0.0) std::reverse(p.envelope.begin(), p.envelope.end());
  for (auto& h : p.holes)
    if (signed_area(h) > 0.0) std::reverse(h.begin(), h.end());
}

Point2 rotate(Point2 p, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

Ring rotate(std::span<const Point2> ring, double angle) {
  Ring out;
  out.reserve(ring.size());
  for (const auto& p : ring) out.push_back(rotate(p, angle));
  return out;
}

RegionPolygon rotate(const RegionPolygon& p, double angle) {
  RegionPolygon out;
  out.envelope = rotate(p.envelope, angle);
  for (const auto& h : p.holes) out.holes.push_back(rotate(h, angle));
  return out;
}

}  // namespace radsurvey::geo

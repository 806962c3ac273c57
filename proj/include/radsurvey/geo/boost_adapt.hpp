#pragma once

// Conversions between the local polygon types and Boost.Geometry models,
// used for buffering, clipping and validity checks.

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>

#include "radsurvey/geo/types.hpp"

namespace radsurvey::geo::bgx {

namespace bg = boost::geometry;
using BPoint = bg::model::d2::point_xy<double>;
using BPolygon = bg::model::polygon<BPoint, false, true>;  // counter-clockwise outer, closed
using BMulti = bg::model::multi_polygon<BPolygon>;
using BRing = bg::model::ring<BPoint, false, true>;
using BSegment = bg::model::segment<BPoint>;
using BLine = bg::model::linestring<BPoint>;

inline BRing to_bring(const Ring& r) {
  BRing out;
  for (const auto& p : r) out.push_back({p.x, p.y});
  if (!r.empty()) out.push_back({r.front().x, r.front().y});
  bg::correct(out);
  return out;
}

inline BPolygon to_bpolygon(const RegionPolygon& p) {
  BPolygon out;
  for (const auto& q : p.envelope) out.outer().push_back({q.x, q.y});
  if (!p.envelope.empty()) out.outer().push_back({p.envelope.front().x, p.envelope.front().y});
  for (const auto& h : p.holes) {
    out.inners().emplace_back();
    for (const auto& q : h) out.inners().back().push_back({q.x, q.y});
    if (!h.empty()) out.inners().back().push_back({h.front().x, h.front().y});
  }
  bg::correct(out);
  return out;
}

inline Ring from_bring(const BRing& r) {
  Ring out;
  for (const auto& p : r) out.push_back({p.x(), p.y()});
  if (out.size() > 1 && out.front() == out.back()) out.pop_back();
  return out;
}

inline RegionPolygon from_bpolygon(const BPolygon& p) {
  RegionPolygon out;
  for (const auto& q : p.outer()) out.envelope.push_back({q.x(), q.y()});
  if (out.envelope.size() > 1 && out.envelope.front() == out.envelope.back()) out.envelope.pop_back();
  for (const auto& h : p.inners()) {
    Ring ring;
    for (const auto& q : h) ring.push_back({q.x(), q.y()});
    if (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
    out.holes.push_back(std::move(ring));
  }
  return out;
}

/// Buffers by `distance` (negative erodes) with mitred joins, a vertex
/// offsetting that keeps the vertex count of convex corners.
inline BMulti buffer_mitre(const BMulti& in, double distance) {
  if (distance == 0.0) return in;
  namespace sb = bg::strategy::buffer;
  BMulti out;
  bg::buffer(in, out, sb::distance_symmetric<double>(distance), sb::side_straight(), sb::join_miter(4.0),
             sb::end_flat(), sb::point_square());
  return out;
}

/// Round buffer (true Minkowski sum with a polygonal disc).
inline BMulti buffer_round(const BMulti& in, double distance, int points_per_circle = 72) {
  if (distance == 0.0) return in;
  namespace sb = bg::strategy::buffer;
  BMulti out;
  bg::buffer(in, out, sb::distance_symmetric<double>(distance), sb::side_straight(), sb::join_round(points_per_circle),
             sb::end_round(points_per_circle), sb::point_circle(points_per_circle));
  return out;
}

}  // namespace radsurvey::geo::bgx

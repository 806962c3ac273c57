#include "radsurvey/coverage/visibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "radsurvey/error.hpp"
#include "radsurvey/geo/boost_adapt.hpp"
#include "radsurvey/geo/geometry.hpp"

namespace radsurvey::coverage {

namespace {

constexpr double kTol = 1e-9;

enum class Where { Inside, Boundary, Outside };

Where classify(const geo::Ring& ring, geo::Point2 p) {
  if (geo::point_ring_distance(ring, p) <= kTol) return Where::Boundary;
  return geo::point_in_ring(ring, p) ? Where::Inside : Where::Outside;
}

bool strictly_inside(const geo::RegionPolygon& poly, geo::Point2 p) {
  if (classify(poly.envelope, p) != Where::Inside) return false;
  for (const auto& h : poly.holes)
    if (classify(h, p) != Where::Outside) return false;
  return true;
}

bool covers(const geo::RegionPolygon& poly, geo::Point2 p) {
  if (classify(poly.envelope, p) == Where::Outside) return false;
  for (const auto& h : poly.holes)
    if (classify(h, p) == Where::Inside) return false;
  return true;
}

template <typename F>
void for_each_ring(const FreeSpace& fs, F&& f) {
  // Second argument: whether the ring's interior side is free space.
  for (const auto& p : fs.regions) {
    f(p.envelope, true);
    for (const auto& h : p.holes) f(h, false);
  }
  for (const auto& p : fs.blockers) {
    f(p.envelope, false);
    for (const auto& h : p.holes) f(h, true);
  }
}

}  // namespace

bool FreeSpace::point_free(geo::Point2 p) const {
  if (bounded && std::none_of(regions.begin(), regions.end(), [&](const auto& r) { return covers(r, p); }))
    return false;
  return std::none_of(blockers.begin(), blockers.end(), [&](const auto& b) { return strictly_inside(b, p); });
}

bool FreeSpace::segment_free(geo::Point2 a, geo::Point2 b) const {
  if (!point_free(a) || !point_free(b)) return false;
  const geo::Point2 d = b - a;
  const double len2 = geo::dot(d, d);
  if (len2 == 0.0) return true;
  const double min_x = std::min(a.x, b.x) - kTol, max_x = std::max(a.x, b.x) + kTol;
  const double min_y = std::min(a.y, b.y) - kTol, max_y = std::max(a.y, b.y) + kTol;
  std::vector<double> ts{0.0, 1.0};
  for_each_ring(*this, [&](const geo::Ring& ring, bool) {
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const geo::Point2 c = ring[i];
      const geo::Point2 e = ring[(i + 1) % ring.size()];
      if (std::max(c.x, e.x) < min_x || std::min(c.x, e.x) > max_x || std::max(c.y, e.y) < min_y ||
          std::min(c.y, e.y) > max_y)
        continue;
      const geo::Point2 f = e - c;
      const double denom = geo::cross(d, f);
      const double flen = geo::norm(f);
      if (std::abs(denom) > 1e-12 * std::sqrt(len2) * flen) {
        const double t = geo::cross(c - a, f) / denom;
        const double u = geo::cross(c - a, d) / denom;
        if (u >= -1e-12 && u <= 1 + 1e-12 && t > 0.0 && t < 1.0) ts.push_back(t);
      } else {
        // Parallel: collinear overlaps contribute the edge endpoints.
        for (const geo::Point2 q : {c, e}) {
          const double t = geo::dot(q - a, d) / len2;
          if (t > 0.0 && t < 1.0 && geo::point_segment_distance(q, a, b) <= kTol) ts.push_back(t);
        }
      }
      // Vertices touching the segment split it as well.
      const double tv = geo::dot(c - a, d) / len2;
      if (tv > 0.0 && tv < 1.0 && geo::point_segment_distance(c, a, b) <= kTol) ts.push_back(tv);
    }
  });
  std::sort(ts.begin(), ts.end());
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    if (ts[i + 1] - ts[i] <= 1e-12) continue;
    const double tm = 0.5 * (ts[i] + ts[i + 1]);
    if (!point_free(a + tm * d)) return false;
  }
  return true;
}

VisibilityGraph::VisibilityGraph(FreeSpace space) : space_(std::move(space)) {
  // Shortest paths bend only at vertices where free space is locally
  // non-convex, i.e. right turns when walking with free space on the left.
  for_each_ring(space_, [&](const geo::Ring& ring, bool inside_free) {
    const double orient = geo::signed_area(ring) > 0.0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const geo::Point2 a = ring[(i + ring.size() - 1) % ring.size()];
      const geo::Point2 v = ring[i];
      const geo::Point2 c = ring[(i + 1) % ring.size()];
      // Turn measured as if the ring kept free space on its left.
      const double free_left = inside_free ? orient : -orient;
      const double turn = geo::cross(v - a, c - v) * free_left;
      const double scale = geo::distance(a, v) * geo::distance(v, c);
      if (turn < -1e-12 * scale && space_.point_free(v)) nodes_.push_back(v);
    }
  });
  adj_.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes_.size(); ++j) {
      if (!space_.segment_free(nodes_[i], nodes_[j])) continue;
      const double w = geo::distance(nodes_[i], nodes_[j]);
      adj_[i].emplace_back(static_cast<int>(j), w);
      adj_[j].emplace_back(static_cast<int>(i), w);
    }
  }
}

std::vector<geo::Point2> VisibilityGraph::shortest_path(geo::Point2 a, geo::Point2 b) const {
  if (!space_.point_free(a) || !space_.point_free(b))
    fail(ErrorCode::Unreachable, "path endpoint lies inside an obstacle");
  if (space_.segment_free(a, b)) return {a, b};
  const int n = static_cast<int>(nodes_.size());
  const int ia = n;
  const int ib = n + 1;
  std::vector<std::vector<std::pair<int, double>>> extra(2);
  for (int i = 0; i < n; ++i) {
    if (space_.segment_free(a, nodes_[static_cast<std::size_t>(i)]))
      extra[0].emplace_back(i, geo::distance(a, nodes_[static_cast<std::size_t>(i)]));
    if (space_.segment_free(nodes_[static_cast<std::size_t>(i)], b))
      extra[1].emplace_back(i, geo::distance(nodes_[static_cast<std::size_t>(i)], b));
  }
  std::vector<double> to_b(static_cast<std::size_t>(n), -1.0);
  for (const auto& [i, w] : extra[1]) to_b[static_cast<std::size_t>(i)] = w;

  std::vector<double> dist(static_cast<std::size_t>(n + 2), std::numeric_limits<double>::infinity());
  std::vector<int> parent(static_cast<std::size_t>(n + 2), -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[static_cast<std::size_t>(ia)] = 0.0;
  pq.push({0.0, ia});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    if (u == ib) break;
    auto relax = [&](int v, double w) {
      if (d + w < dist[static_cast<std::size_t>(v)]) {
        dist[static_cast<std::size_t>(v)] = d + w;
        parent[static_cast<std::size_t>(v)] = u;
        pq.push({d + w, v});
      }
    };
    if (u == ia) {
      for (const auto& [v, w] : extra[0]) relax(v, w);
      continue;
    }
    for (const auto& [v, w] : adj_[static_cast<std::size_t>(u)]) relax(v, w);
    if (to_b[static_cast<std::size_t>(u)] >= 0.0) relax(ib, to_b[static_cast<std::size_t>(u)]);
  }
  if (!std::isfinite(dist[static_cast<std::size_t>(ib)])) fail(ErrorCode::Unreachable, "no collision-free path");
  std::vector<geo::Point2> path;
  for (int v = ib; v >= 0; v = parent[static_cast<std::size_t>(v)]) {
    path.push_back(v == ia ? a : v == ib ? b : nodes_[static_cast<std::size_t>(v)]);
    if (v == ia) break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<geo::Point2> visibility_path(geo::Point2 a, geo::Point2 b, const std::vector<geo::RegionPolygon>& obstacles,
                                         double clearance) {
  if (clearance < 0.0) fail(ErrorCode::Config, "clearance must be >= 0");
  namespace bg = boost::geometry;
  geo::bgx::BMulti all;
  for (const auto& o : obstacles) {
    geo::bgx::BMulti merged;
    bg::union_(all, geo::bgx::to_bpolygon(o), merged);
    all = std::move(merged);
  }
  FreeSpace fs;
  for (const auto& p : geo::bgx::buffer_mitre(all, clearance)) fs.blockers.push_back(geo::bgx::from_bpolygon(p));
  return VisibilityGraph(std::move(fs)).shortest_path(a, b);
}

double polyline_length(const std::vector<geo::Point2>& path) {
  double len = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) len += geo::distance(path[i - 1], path[i]);
  return len;
}

}  // namespace radsurvey::coverage

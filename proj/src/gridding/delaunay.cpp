#include "radsurvey/gridding/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "radsurvey/error.hpp"

namespace radsurvey::gridding {

namespace {

struct Tri {
  std::array<int, 3> v;
  std::array<int, 3> nb;  // nb[k] is across the edge opposite v[k]
  bool alive = true;
};

double orient(const geo::Point2& a, const geo::Point2& b, const geo::Point2& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

// > 0 when d lies strictly inside the circumcircle of counter-clockwise abc.
double incircle(const geo::Point2& a, const geo::Point2& b, const geo::Point2& c, const geo::Point2& d) {
  const long double adx = a.x - d.x, ady = a.y - d.y;
  const long double bdx = b.x - d.x, bdy = b.y - d.y;
  const long double cdx = c.x - d.x, cdy = c.y - d.y;
  const long double ad = adx * adx + ady * ady;
  const long double bd = bdx * bdx + bdy * bdy;
  const long double cd = cdx * cdx + cdy * cdy;
  return static_cast<double>(adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx));
}

using Triangles = std::vector<std::array<int, 3>>;
using EdgeMap = std::map<std::pair<int, int>, int>;  // directed edge -> triangle

void index_edges(const Triangles& tris, std::size_t t, EdgeMap& edges) {
  const auto& v = tris[t];
  for (int k = 0; k < 3; ++k) edges[{v[static_cast<std::size_t>(k)], v[static_cast<std::size_t>((k + 1) % 3)]}] = static_cast<int>(t);
}

void unindex_edges(const Triangles& tris, std::size_t t, EdgeMap& edges) {
  const auto& v = tris[t];
  for (int k = 0; k < 3; ++k) edges.erase({v[static_cast<std::size_t>(k)], v[static_cast<std::size_t>((k + 1) % 3)]});
}

int third_vertex(const std::array<int, 3>& v, int a, int b) {
  for (int x : v)
    if (x != a && x != b) return x;
  return -1;
}

// A finite super-triangle leaves thin pockets uncovered where the hull is
// nearly straight. Fill every reflex corner of the boundary with an ear,
// then restore the empty-circumcircle property with Lawson flips.
void complete_hull(const std::vector<geo::Point2>& pts, Triangles& tris) {
  auto P = [&](int i) { return pts[static_cast<std::size_t>(i)]; };
  EdgeMap edges;
  for (std::size_t t = 0; t < tris.size(); ++t) index_edges(tris, t, edges);

  std::map<int, int> next;  // counter-clockwise boundary successor
  for (const auto& [e, t] : edges)
    if (!edges.count({e.second, e.first})) next[e.first] = e.second;

  std::vector<std::pair<int, int>> stack;
  for (bool changed = true; changed;) {
    changed = false;
    for (auto it = next.begin(); it != next.end(); ++it) {
      const int u = it->first;
      const int v = it->second;
      const auto wit = next.find(v);
      if (wit == next.end()) continue;
      const int w = wit->second;
      if (w == u || orient(P(u), P(v), P(w)) >= 0.0) continue;
      // The ear must not swallow another boundary vertex.
      bool blocked = false;
      for (const auto& [b, bn] : next) {
        if (b == u || b == v || b == w) continue;
        const auto q = P(b);
        if (orient(P(u), P(w), q) > 0.0 && orient(P(w), P(v), q) > 0.0 && orient(P(v), P(u), q) > 0.0) {
          blocked = true;
          break;
        }
      }
      if (blocked) continue;
      tris.push_back({u, w, v});
      index_edges(tris, tris.size() - 1, edges);
      stack.push_back({u, v});
      stack.push_back({v, w});
      next.erase(wit);
      next[u] = w;
      changed = true;
      break;
    }
  }

  while (!stack.empty()) {
    const auto [a, b] = stack.back();
    stack.pop_back();
    const auto i1 = edges.find({a, b});
    const auto i2 = edges.find({b, a});
    if (i1 == edges.end() || i2 == edges.end()) continue;
    const auto t1 = static_cast<std::size_t>(i1->second);
    const auto t2 = static_cast<std::size_t>(i2->second);
    const int c = third_vertex(tris[t1], a, b);
    const int d = third_vertex(tris[t2], a, b);
    if (incircle(P(a), P(b), P(c), P(d)) <= 0.0) continue;
    if (orient(P(a), P(d), P(c)) <= 0.0 || orient(P(d), P(b), P(c)) <= 0.0) continue;
    unindex_edges(tris, t1, edges);
    unindex_edges(tris, t2, edges);
    tris[t1] = {a, d, c};
    tris[t2] = {d, b, c};
    index_edges(tris, t1, edges);
    index_edges(tris, t2, edges);
    for (const auto& e : {std::pair{a, d}, std::pair{d, b}, std::pair{b, c}, std::pair{c, a}}) stack.push_back(e);
  }
}

}  // namespace

Triangulation delaunay(const std::vector<geo::Point2>& points, const std::vector<double>& values) {
  if (points.size() != values.size()) fail(ErrorCode::Geometry, "points and values differ in length");

  Triangulation out;
  {
    // Merge coincident points, averaging their values.
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return points[a].x != points[b].x ? points[a].x < points[b].x : points[a].y < points[b].y;
    });
    for (std::size_t k = 0; k < order.size();) {
      std::size_t e = k;
      double sum = 0.0;
      while (e < order.size() && points[order[e]] == points[order[k]]) sum += values[order[e++]];
      out.points.push_back(points[order[k]]);
      out.values.push_back(sum / static_cast<double>(e - k));
      k = e;
    }
  }
  const int n = static_cast<int>(out.points.size());
  if (n < 3) fail(ErrorCode::Geometry, "triangulation needs at least 3 distinct points");
  {
    bool collinear = true;
    for (int i = 2; i < n && collinear; ++i)
      if (std::abs(orient(out.points[0], out.points[1], out.points[static_cast<std::size_t>(i)])) > 0.0) collinear = false;
    if (collinear) fail(ErrorCode::Geometry, "all points are collinear");
  }

  double min_x = out.points[0].x, max_x = min_x, min_y = out.points[0].y, max_y = min_y;
  for (const auto& p : out.points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double span = std::max({max_x - min_x, max_y - min_y, 1e-9});
  const double cx = 0.5 * (min_x + max_x);
  const double cy = 0.5 * (min_y + max_y);

  std::vector<geo::Point2> pts = out.points;
  pts.push_back({cx - 1e3 * span, cy - 1e3 * span});
  pts.push_back({cx + 1e3 * span, cy - 1e3 * span});
  pts.push_back({cx, cy + 1e3 * span});

  std::vector<Tri> tris;
  tris.push_back({{n, n + 1, n + 2}, {-1, -1, -1}});

  // Insertion in a Morton-like spatial order keeps the walk short.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto key = [&](int i) {
      const auto& p = out.points[static_cast<std::size_t>(i)];
      const int gx = static_cast<int>((p.x - min_x) / span * 64.0);
      const int gy = static_cast<int>((p.y - min_y) / span * 64.0);
      return std::pair<int, double>{gy * 128 + ((gy % 2) ? 127 - gx : gx), p.x};
    };
    return key(a) < key(b);
  });

  auto contains = [&](const Tri& t, const geo::Point2& p) {
    for (int k = 0; k < 3; ++k)
      if (orient(pts[static_cast<std::size_t>(t.v[static_cast<std::size_t>(k)])],
                 pts[static_cast<std::size_t>(t.v[static_cast<std::size_t>((k + 1) % 3)])], p) < 0.0)
        return false;
    return true;
  };

  int last = 0;
  std::vector<int> cavity;
  std::vector<char> in_cavity;
  for (int pi : order) {
    const geo::Point2 p = pts[static_cast<std::size_t>(pi)];
    // Locate by walking, falling back to a scan.
    int cur = last;
    if (!tris[static_cast<std::size_t>(cur)].alive) cur = -1;
    for (int steps = 0; cur >= 0 && steps < 4 * static_cast<int>(tris.size()); ++steps) {
      const Tri& t = tris[static_cast<std::size_t>(cur)];
      int move = -1;
      for (int k = 0; k < 3; ++k) {
        const auto& a = pts[static_cast<std::size_t>(t.v[static_cast<std::size_t>((k + 1) % 3)])];
        const auto& b = pts[static_cast<std::size_t>(t.v[static_cast<std::size_t>((k + 2) % 3)])];
        if (orient(a, b, p) < 0.0) {
          move = t.nb[static_cast<std::size_t>(k)];
          break;
        }
      }
      if (move < 0) break;
      cur = move;
    }
    if (cur < 0 || !contains(tris[static_cast<std::size_t>(cur)], p)) {
      cur = -1;
      for (std::size_t t = 0; t < tris.size(); ++t)
        if (tris[t].alive && contains(tris[t], p)) {
          cur = static_cast<int>(t);
          break;
        }
      if (cur < 0) fail(ErrorCode::Numeric, "point location failed during triangulation");
    }

    // Grow the cavity from the containing triangle across edges whose far
    // triangle has p inside its circumcircle, or whose edge does not face p.
    in_cavity.assign(tris.size(), 0);
    cavity.assign(1, cur);
    in_cavity[static_cast<std::size_t>(cur)] = 1;
    for (bool grown = true; grown;) {
      grown = false;
      for (std::size_t ci = 0; ci < cavity.size(); ++ci) {
        const Tri& t = tris[static_cast<std::size_t>(cavity[ci])];
        for (int k = 0; k < 3; ++k) {
          const int nb = t.nb[static_cast<std::size_t>(k)];
          if (nb < 0 || in_cavity[static_cast<std::size_t>(nb)]) continue;
          const Tri& u = tris[static_cast<std::size_t>(nb)];
          const auto& a = pts[static_cast<std::size_t>(t.v[static_cast<std::size_t>((k + 1) % 3)])];
          const auto& b = pts[static_cast<std::size_t>(t.v[static_cast<std::size_t>((k + 2) % 3)])];
          const bool bad = incircle(pts[static_cast<std::size_t>(u.v[0])], pts[static_cast<std::size_t>(u.v[1])],
                                    pts[static_cast<std::size_t>(u.v[2])], p) > 0.0;
          if (bad || orient(a, b, p) <= 0.0) {
            in_cavity[static_cast<std::size_t>(nb)] = 1;
            cavity.push_back(nb);
            grown = true;
          }
        }
      }
    }

    // Boundary edges (a, b) in counter-clockwise order around the cavity.
    struct Edge {
      int a, b, outer;
    };
    std::vector<Edge> boundary;
    for (int ti : cavity) {
      const Tri& t = tris[static_cast<std::size_t>(ti)];
      for (int k = 0; k < 3; ++k) {
        const int nb = t.nb[static_cast<std::size_t>(k)];
        if (nb >= 0 && in_cavity[static_cast<std::size_t>(nb)]) continue;
        boundary.push_back({t.v[static_cast<std::size_t>((k + 1) % 3)], t.v[static_cast<std::size_t>((k + 2) % 3)], nb});
      }
    }
    for (int ti : cavity) tris[static_cast<std::size_t>(ti)].alive = false;

    std::map<int, int> starting_at;  // boundary vertex a -> new triangle (a, b, p)
    std::map<int, int> ending_at;    // boundary vertex b -> new triangle
    for (const Edge& e : boundary) {
      const int id = static_cast<int>(tris.size());
      // Triangle (a, b, p): nb[2] across (a, b) is the outer triangle.
      tris.push_back({{e.a, e.b, pi}, {-1, -1, e.outer}});
      if (e.outer >= 0) {
        Tri& o = tris[static_cast<std::size_t>(e.outer)];
        for (int k = 0; k < 3; ++k) {
          const int oa = o.v[static_cast<std::size_t>((k + 1) % 3)];
          const int ob = o.v[static_cast<std::size_t>((k + 2) % 3)];
          if (oa == e.b && ob == e.a) o.nb[static_cast<std::size_t>(k)] = id;
        }
      }
      starting_at[e.a] = id;
      ending_at[e.b] = id;
    }
    for (const Edge& e : boundary) {
      const int id = starting_at[e.a];
      Tri& t = tris[static_cast<std::size_t>(id)];
      // Across (b, p) (opposite a): the new triangle starting at b.
      t.nb[0] = starting_at.count(e.b) ? starting_at[e.b] : -1;
      // Across (p, a) (opposite b): the new triangle ending at a.
      t.nb[1] = ending_at.count(e.a) ? ending_at[e.a] : -1;
    }
    last = static_cast<int>(tris.size()) - 1;
  }

  for (const Tri& t : tris) {
    if (!t.alive) continue;
    if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
    if (orient(out.points[static_cast<std::size_t>(t.v[0])], out.points[static_cast<std::size_t>(t.v[1])],
               out.points[static_cast<std::size_t>(t.v[2])]) <= 0.0)
      continue;
    out.triangles.push_back(t.v);
  }
  complete_hull(out.points, out.triangles);
  std::sort(out.triangles.begin(), out.triangles.end());
  return out;
}

geo::GridGeometry covering_geometry(const std::vector<geo::Point2>& points, double cell_size) {
  if (!(cell_size > 0.0)) fail(ErrorCode::Config, "cell size must be positive");
  if (points.empty()) fail(ErrorCode::Geometry, "no points to cover");
  double min_x = points[0].x, max_x = min_x, min_y = points[0].y, max_y = min_y;
  for (const auto& p : points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  geo::GridGeometry g;
  g.cell_size = cell_size;
  g.origin_x = std::floor(min_x / cell_size) * cell_size;
  g.origin_y = std::floor(min_y / cell_size) * cell_size;
  g.cols = std::max(1, static_cast<int>(std::ceil((max_x - g.origin_x) / cell_size - 1e-9)));
  g.rows = std::max(1, static_cast<int>(std::ceil((max_y - g.origin_y) / cell_size - 1e-9)));
  return g;
}

geo::GridMap rasterize(const Triangulation& tri, const geo::GridGeometry& g) {
  g.validate();
  geo::GridMap out(g);
  for (const auto& t : tri.triangles) {
    const geo::Point2 a = tri.points[static_cast<std::size_t>(t[0])];
    const geo::Point2 b = tri.points[static_cast<std::size_t>(t[1])];
    const geo::Point2 c = tri.points[static_cast<std::size_t>(t[2])];
    const double det = orient(a, b, c);
    const double scale = std::max({std::abs(b.x - a.x), std::abs(c.x - a.x), std::abs(b.y - a.y), std::abs(c.y - a.y)});
    const double eps = 1e-12 * scale * scale;
    const int c0 = std::max(0, static_cast<int>(std::floor((std::min({a.x, b.x, c.x}) - g.origin_x) / g.cell_size - 0.5)));
    const int c1 = std::min(g.cols - 1, static_cast<int>(std::ceil((std::max({a.x, b.x, c.x}) - g.origin_x) / g.cell_size - 0.5)));
    const int r0 = std::max(0, static_cast<int>(std::floor((std::min({a.y, b.y, c.y}) - g.origin_y) / g.cell_size - 0.5)));
    const int r1 = std::min(g.rows - 1, static_cast<int>(std::ceil((std::max({a.y, b.y, c.y}) - g.origin_y) / g.cell_size - 0.5)));
    for (int r = r0; r <= r1; ++r) {
      for (int col = c0; col <= c1; ++col) {
        const std::size_t idx = g.index(r, col);
        if (!out.no_data[idx]) continue;
        const geo::Point2 p = g.center(r, col);
        const double wa = orient(b, c, p);
        const double wb = orient(c, a, p);
        const double wc = orient(a, b, p);
        if (wa < -eps || wb < -eps || wc < -eps) continue;
        out.values[idx] = (wa * tri.values[static_cast<std::size_t>(t[0])] + wb * tri.values[static_cast<std::size_t>(t[1])] +
                           wc * tri.values[static_cast<std::size_t>(t[2])]) /
                          det;
        out.no_data[idx] = 0;
      }
    }
  }
  return out;
}

}  // namespace radsurvey::gridding

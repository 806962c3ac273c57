#include "radsurvey/coverage/boustrophedon.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "radsurvey/error.hpp"
#include "radsurvey/geo/geometry.hpp"

namespace radsurvey::coverage {

namespace {

struct Edge {
  geo::Point2 lo, hi;  // lo.y < hi.y
  double x_at(double y) const {
    if (y <= lo.y) return lo.x;
    if (y >= hi.y) return hi.x;
    return lo.x + (y - lo.y) / (hi.y - lo.y) * (hi.x - lo.x);
  }
};

struct Piece {
  Trapezoid t;
  int cell = -1;
};

double overlap(double a0, double a1, double b0, double b1) { return std::min(a1, b1) - std::max(a0, b0); }

void push_unique(geo::Ring& ring, geo::Point2 p) {
  if (ring.empty() || geo::distance(ring.back(), p) > 1e-12) ring.push_back(p);
}

// Drops repeated and collinear vertices.
geo::Ring clean_ring(geo::Ring ring) {
  while (ring.size() > 1 && geo::distance(ring.front(), ring.back()) <= 1e-12) ring.pop_back();
  bool changed = true;
  while (changed && ring.size() > 3) {
    changed = false;
    for (std::size_t i = 0; i < ring.size() && ring.size() > 3; ++i) {
      const auto& a = ring[(i + ring.size() - 1) % ring.size()];
      const auto& b = ring[i];
      const auto& c = ring[(i + 1) % ring.size()];
      const double scale = std::max(geo::distance(a, b), geo::distance(b, c));
      if (std::abs(geo::cross(b - a, c - b)) <= 1e-12 * scale * scale && geo::dot(b - a, c - b) >= 0.0) {
        ring.erase(ring.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  return ring;
}

void decompose_into(const geo::RegionPolygon& region, double sweep_dir, CellDecomposition& dec) {
  const geo::RegionPolygon local = geo::rotate(region, -sweep_dir);
  if (!(geo::polygon_area(local) > 0.0)) fail(ErrorCode::Geometry, "region has zero area");

  std::vector<Edge> edges;
  std::vector<double> ys;
  auto add_ring = [&](const geo::Ring& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      const geo::Point2 a = r[i];
      const geo::Point2 b = r[(i + 1) % r.size()];
      ys.push_back(a.y);
      if (a.y == b.y) continue;
      edges.push_back(a.y < b.y ? Edge{a, b} : Edge{b, a});
    }
  };
  add_ring(local.envelope);
  for (const auto& h : local.holes) add_ring(h);
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  const int base = static_cast<int>(dec.cells.size());
  std::vector<Piece> prev;
  for (std::size_t s = 0; s + 1 < ys.size(); ++s) {
    const double y0 = ys[s];
    const double y1 = ys[s + 1];
    const double ym = 0.5 * (y0 + y1);
    std::vector<std::pair<double, const Edge*>> xs;
    for (const auto& e : edges)
      if (e.lo.y <= y0 && e.hi.y >= y1) xs.emplace_back(e.x_at(ym), &e);
    std::sort(xs.begin(), xs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    if (xs.size() % 2 != 0) fail(ErrorCode::Geometry, "region boundary is not closed or self-intersects");

    std::vector<Piece> cur;
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      Piece p;
      p.t = {y0, y1, xs[k].second->x_at(y0), xs[k].second->x_at(y1), xs[k + 1].second->x_at(y0),
             xs[k + 1].second->x_at(y1)};
      cur.push_back(p);
    }

    // Match across the boundary y0.
    std::vector<std::vector<int>> up(prev.size()), down(cur.size());
    for (std::size_t i = 0; i < prev.size(); ++i)
      for (std::size_t j = 0; j < cur.size(); ++j)
        if (overlap(prev[i].t.xl_hi, prev[i].t.xr_hi, cur[j].t.xl_lo, cur[j].t.xr_lo) > 1e-12) {
          up[i].push_back(static_cast<int>(j));
          down[j].push_back(static_cast<int>(i));
        }
    for (std::size_t j = 0; j < cur.size(); ++j) {
      if (down[j].size() == 1 && up[static_cast<std::size_t>(down[j][0])].size() == 1) {
        cur[j].cell = prev[static_cast<std::size_t>(down[j][0])].cell;
      } else {
        cur[j].cell = static_cast<int>(dec.cells.size());
        dec.cells.emplace_back();
        dec.adjacency.emplace_back();
      }
      dec.cells[static_cast<std::size_t>(cur[j].cell)].trapezoids.push_back(cur[j].t);
      for (int i : down[j]) {
        const int a = prev[static_cast<std::size_t>(i)].cell;
        const int b = cur[j].cell;
        if (a == b) continue;
        dec.adjacency[static_cast<std::size_t>(a)].push_back(b);
        dec.adjacency[static_cast<std::size_t>(b)].push_back(a);
      }
    }
    prev = std::move(cur);
  }

  for (std::size_t c = static_cast<std::size_t>(base); c < dec.cells.size(); ++c) {
    Cell& cell = dec.cells[c];
    geo::Ring right;
    geo::Ring left;
    double area = 0.0;
    for (const auto& t : cell.trapezoids) {
      push_unique(right, {t.xr_lo, t.y_lo});
      push_unique(right, {t.xr_hi, t.y_hi});
      area += 0.5 * ((t.xr_lo - t.xl_lo) + (t.xr_hi - t.xl_hi)) * (t.y_hi - t.y_lo);
    }
    for (auto it = cell.trapezoids.rbegin(); it != cell.trapezoids.rend(); ++it) {
      push_unique(left, {it->xl_hi, it->y_hi});
      push_unique(left, {it->xl_lo, it->y_lo});
    }
    geo::Ring ring = right;
    for (const auto& p : left) push_unique(ring, p);
    cell.polygon = geo::rotate(clean_ring(std::move(ring)), sweep_dir);
    cell.area = area;
    auto& adj = dec.adjacency[c];
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
}

}  // namespace

CellDecomposition decompose_boustrophedon(const geo::RegionPolygon& region, double sweep_dir) {
  CellDecomposition dec;
  dec.sweep_dir = sweep_dir;
  decompose_into(region, sweep_dir, dec);
  return dec;
}

CellDecomposition decompose_parts(const std::vector<geo::RegionPolygon>& parts, double sweep_dir) {
  CellDecomposition dec;
  dec.sweep_dir = sweep_dir;
  for (const auto& p : parts) decompose_into(p, sweep_dir, dec);
  return dec;
}

double auto_sweep_direction(const std::vector<geo::RegionPolygon>& parts) {
  double best = 0.0;
  std::size_t best_count = 0;
  for (int k = 0; k < 8; ++k) {
    const double dir = k * std::numbers::pi / 8.0;
    const std::size_t n = decompose_parts(parts, dir).cells.size();
    if (k == 0 || n < best_count) {
      best = dir;
      best_count = n;
    }
  }
  return best;
}

bool cell_span(const Cell& cell, double y, double& xl, double& xr) {
  bool found = false;
  for (const auto& t : cell.trapezoids) {
    if (y < t.y_lo || y > t.y_hi) continue;
    const double f = t.y_hi > t.y_lo ? (y - t.y_lo) / (t.y_hi - t.y_lo) : 0.0;
    const double l = t.xl_lo + f * (t.xl_hi - t.xl_lo);
    const double r = t.xr_lo + f * (t.xr_hi - t.xr_lo);
    if (!found) {
      xl = l;
      xr = r;
      found = true;
    } else {
      xl = std::min(xl, l);
      xr = std::max(xr, r);
    }
  }
  return found;
}

std::vector<int> order_cells(const CellDecomposition& dec, int start) {
  const int n = static_cast<int>(dec.cells.size());
  if (n == 0) return {};
  if (start < 0 || start >= n) fail(ErrorCode::Config, "start cell out of range");
  std::vector<int> order;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::function<void(int)> visit = [&](int c) {
    seen[static_cast<std::size_t>(c)] = 1;
    order.push_back(c);
    for (int nb : dec.adjacency[static_cast<std::size_t>(c)])
      if (!seen[static_cast<std::size_t>(nb)]) visit(nb);
  };
  visit(start);
  for (int c = 0; c < n; ++c)
    if (!seen[static_cast<std::size_t>(c)]) visit(c);
  return order;
}

}  // namespace radsurvey::coverage

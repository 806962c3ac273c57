#include "radsurvey/route/astar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <queue>

#include <fmt/format.h>

#include "radsurvey/error.hpp"

namespace radsurvey::route {

geo::BinaryGrid inflate(const geo::BinaryGrid& grid, int cells) {
  if (cells < 0) fail(ErrorCode::Config, "inflation must be >= 0");
  if (cells == 0) return grid;
  const auto& g = grid.geometry;
  // Separable: rows then columns.
  geo::BinaryGrid tmp(g);
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) {
      bool v = false;
      for (int d = std::max(0, c - cells); d <= std::min(g.cols - 1, c + cells) && !v; ++d) v = grid.at(r, d);
      tmp.set(r, c, v);
    }
  geo::BinaryGrid out(g);
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) {
      bool v = false;
      for (int d = std::max(0, r - cells); d <= std::min(g.rows - 1, r + cells) && !v; ++d) v = tmp.at(d, c);
      out.set(r, c, v);
    }
  return out;
}

GridPath astar(const geo::BinaryGrid& grid, geo::CellIndex start, geo::CellIndex goal) {
  const auto& g = grid.geometry;
  if (!g.in_bounds(start.row, start.col) || !g.in_bounds(goal.row, goal.col))
    fail(ErrorCode::Config, "path endpoint outside the grid");
  if (grid.at(start.row, start.col) || grid.at(goal.row, goal.col)) fail(ErrorCode::Config, "path endpoint is occupied");

  constexpr double kDiag = std::numbers::sqrt2;
  auto h = [&](int r, int c) {
    const int dr = std::abs(r - goal.row);
    const int dc = std::abs(c - goal.col);
    return (kDiag - 1.0) * std::min(dr, dc) + std::max(dr, dc);
  };
  const std::size_t n = g.size();
  std::vector<double> gscore(n, std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> parent(n, -1);
  std::vector<char> closed(n, 0);
  struct Item {
    double f, g;
    std::size_t idx;
    bool operator>(const Item& o) const { return f != o.f ? f > o.f : (g != o.g ? g < o.g : idx > o.idx); }
  };
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  const std::size_t s = g.index(start.row, start.col);
  const std::size_t t = g.index(goal.row, goal.col);
  gscore[s] = 0.0;
  open.push({h(start.row, start.col), 0.0, s});
  while (!open.empty()) {
    const Item it = open.top();
    open.pop();
    if (closed[it.idx]) continue;
    closed[it.idx] = 1;
    if (it.idx == t) break;
    const int r = static_cast<int>(it.idx / static_cast<std::size_t>(g.cols));
    const int c = static_cast<int>(it.idx % static_cast<std::size_t>(g.cols));
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const int nr = r + dr;
        const int nc = c + dc;
        if (!g.in_bounds(nr, nc) || grid.at(nr, nc)) continue;
        if (dr != 0 && dc != 0 && (grid.at(r + dr, c) || grid.at(r, c + dc))) continue;
        const std::size_t ni = g.index(nr, nc);
        if (closed[ni]) continue;
        const double ng = it.g + ((dr != 0 && dc != 0) ? kDiag : 1.0);
        if (ng < gscore[ni]) {
          gscore[ni] = ng;
          parent[ni] = static_cast<std::int64_t>(it.idx);
          open.push({ng + h(nr, nc), ng, ni});
        }
      }
    }
  }
  if (!std::isfinite(gscore[t])) fail(ErrorCode::Unreachable, "goal cell is unreachable");
  GridPath path;
  path.cost = gscore[t];
  path.length = path.cost * g.cell_size;
  for (std::int64_t v = static_cast<std::int64_t>(t); v >= 0; v = parent[static_cast<std::size_t>(v)]) {
    path.cells.push_back({static_cast<int>(static_cast<std::size_t>(v) / static_cast<std::size_t>(g.cols)),
                          static_cast<int>(static_cast<std::size_t>(v) % static_cast<std::size_t>(g.cols))});
    if (static_cast<std::size_t>(v) == s) break;
  }
  std::reverse(path.cells.begin(), path.cells.end());
  return path;
}

geo::CellIndex nearest_free_cell(const geo::BinaryGrid& grid, geo::Point2 p) {
  const auto& g = grid.geometry;
  double best = std::numeric_limits<double>::infinity();
  geo::CellIndex out{-1, -1};
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) {
      if (grid.at(r, c)) continue;
      const double d = geo::distance(g.center(r, c), p);
      if (d < best) {
        best = d;
        out = {r, c};
      }
    }
  if (out.row < 0) fail(ErrorCode::Unreachable, "grid has no free cell");
  return out;
}

namespace {

struct LegResult {
  std::vector<geo::Point2> polyline;
  double length = 0.0;
};

}  // namespace

RoutePlan plan_routes(const geo::BinaryGrid& grid, const std::vector<geo::Point2>& unload_candidates,
                      const std::vector<Endpoints>& rois, const RouteOptions& opts) {
  if (unload_candidates.empty()) fail(ErrorCode::Config, "no unloading point candidates");
  const auto& g = grid.geometry;
  // Named points: u0..uK-1, then per ROI the entry and exit.
  std::vector<geo::Point2> pts = unload_candidates;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < unload_candidates.size(); ++i) names.push_back(fmt::format("unload{}", i));
  for (std::size_t i = 0; i < rois.size(); ++i) {
    pts.push_back(rois[i].entry);
    names.push_back(fmt::format("roi{}.entry", i));
    pts.push_back(rois[i].exit);
    names.push_back(fmt::format("roi{}.exit", i));
  }
  std::vector<geo::CellIndex> cells;
  for (const auto& p : pts) cells.push_back(nearest_free_cell(grid, p));

  std::map<std::pair<int, int>, LegResult> cache;
  auto leg = [&](int a, int b) -> const LegResult& {
    const auto key = std::make_pair(a, b);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    GridPath gp;
    try {
      gp = astar(grid, cells[static_cast<std::size_t>(a)], cells[static_cast<std::size_t>(b)]);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Unreachable)
        fail(ErrorCode::Unreachable, "leg " + names[static_cast<std::size_t>(a)] + " -> " +
                                         names[static_cast<std::size_t>(b)] + " is unreachable");
      throw;
    }
    LegResult lr;
    lr.polyline.push_back(pts[static_cast<std::size_t>(a)]);
    for (std::size_t k = 1; k + 1 < gp.cells.size(); ++k) lr.polyline.push_back(g.center(gp.cells[k].row, gp.cells[k].col));
    lr.polyline.push_back(pts[static_cast<std::size_t>(b)]);
    lr.length = gp.length;
    return cache.emplace(key, std::move(lr)).first->second;
  };

  const int K = static_cast<int>(unload_candidates.size());
  const int R = static_cast<int>(rois.size());
  auto entry_of = [&](int roi, bool rev) { return K + 2 * roi + (rev ? 1 : 0); };
  auto exit_of = [&](int roi, bool rev) { return K + 2 * roi + (rev ? 0 : 1); };

  RoutePlan best;
  best.total_length = std::numeric_limits<double>::infinity();
  std::vector<int> perm(static_cast<std::size_t>(R));
  for (int i = 0; i < R; ++i) perm[static_cast<std::size_t>(i)] = i;
  const int dir_count = opts.allow_reverse ? (1 << R) : 1;
  for (int u = 0; u < K; ++u) {
    std::sort(perm.begin(), perm.end());
    do {
      for (int mask = 0; mask < dir_count; ++mask) {
        double total = 0.0;
        std::vector<std::pair<int, int>> seq;
        int prev = u;
        for (int roi : perm) {
          const bool rev = (mask >> roi) & 1;
          seq.emplace_back(prev, entry_of(roi, rev));
          prev = exit_of(roi, rev);
        }
        seq.emplace_back(prev, u);
        if (R == 0) seq.clear();
        for (const auto& [a, b] : seq) total += leg(a, b).length;
        if (total < best.total_length - 1e-9) {
          best.total_length = total;
          best.chosen_unload = u;
          best.unload_point = unload_candidates[static_cast<std::size_t>(u)];
          best.roi_order = perm;
          best.reversed.assign(static_cast<std::size_t>(R), false);
          for (int roi = 0; roi < R; ++roi) best.reversed[static_cast<std::size_t>(roi)] = (mask >> roi) & 1;
          best.legs.clear();
          for (const auto& [a, b] : seq) {
            const auto& lr = leg(a, b);
            best.legs.push_back({names[static_cast<std::size_t>(a)], names[static_cast<std::size_t>(b)], lr.polyline, lr.length});
          }
        }
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return best;
}

nlohmann::json route_plan_to_json(const RoutePlan& p) {
  using nlohmann::json;
  json legs = json::array();
  for (const auto& l : p.legs) {
    json pts = json::array();
    for (const auto& q : l.polyline) pts.push_back({q.x, q.y});
    legs.push_back({{"from", l.from}, {"to", l.to}, {"length", l.length}, {"waypoints", pts}});
  }
  return json{{"legs", legs},
              {"total_length", p.total_length},
              {"chosen_unload", p.chosen_unload},
              {"unload_point", {p.unload_point.x, p.unload_point.y}},
              {"roi_order", p.roi_order},
              {"reversed", p.reversed}};
}

}  // namespace radsurvey::route

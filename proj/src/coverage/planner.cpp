#include "radsurvey/coverage/planner.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "radsurvey/error.hpp"
#include "radsurvey/geo/boost_adapt.hpp"
#include "radsurvey/geo/geometry.hpp"
#include "radsurvey/geo/io.hpp"

namespace radsurvey::coverage {

std::string to_string(SegmentKind k) { return k == SegmentKind::Survey ? "survey" : "connector"; }

std::vector<double> line_offsets(double y_lo, double y_hi, double spacing) {
  if (!(spacing > 0.0)) fail(ErrorCode::Config, "line spacing must be positive");
  const double h = y_hi - y_lo;
  if (!(h > 0.0)) return {y_lo};
  const int n = std::max(1, static_cast<int>(std::ceil(h / spacing - 1e-9)));
  if (n == 1) return {y_lo + 0.5 * h};
  std::vector<double> out;
  for (int k = 0; k < n; ++k) out.push_back(y_lo + 0.5 * spacing + k * spacing);
  if (out.back() > y_hi) out.back() = 0.5 * (out[out.size() - 2] + y_hi);
  return out;
}

namespace {

struct SidePoint {
  double y, xl, xr;
};

// Cell sides from y0 towards y1, trapezoid by trapezoid. Each trapezoid adds
// its own entry and exit points, so a horizontal step of a side appears as two
// points at the same height.
std::vector<SidePoint> side_band(const Cell& cell, double y0, double y1) {
  const bool up = y1 >= y0;
  const double lo = std::min(y0, y1), hi = std::max(y0, y1);
  std::vector<SidePoint> out;
  auto at = [](const Trapezoid& t, double y) {
    const double f = t.y_hi > t.y_lo ? (y - t.y_lo) / (t.y_hi - t.y_lo) : 0.0;
    return SidePoint{y, t.xl_lo + f * (t.xl_hi - t.xl_lo), t.xr_lo + f * (t.xr_hi - t.xr_lo)};
  };
  auto visit = [&](const Trapezoid& t) {
    const double a = std::max(lo, t.y_lo), b = std::min(hi, t.y_hi);
    if (a > b) return;
    if (out.empty() && (up ? a > y0 + 1e-12 : b < y0 - 1e-12)) return;  // the band starts inside this trapezoid
    out.push_back(at(t, up ? a : b));
    out.push_back(at(t, up ? b : a));
  };
  if (up)
    for (const auto& t : cell.trapezoids) visit(t);
  else
    for (auto it = cell.trapezoids.rbegin(); it != cell.trapezoids.rend(); ++it) visit(*it);
  return out;
}

// Out-and-back path along one side up to its outermost point in the band,
// appended to `spur`; nothing when the side never leaves the line's end.
template <class World>
void append_spur(const std::vector<SidePoint>& band, bool left, const World& world, geo::Point2 end,
                 std::vector<geo::Point2>& spur) {
  if (band.empty()) return;
  auto x_of = [left](const SidePoint& p) { return left ? p.xl : p.xr; };
  const double outward = left ? -1.0 : 1.0;
  std::size_t best = 0;
  for (std::size_t i = 1; i < band.size(); ++i)
    if ((x_of(band[i]) - x_of(band[best])) * outward > 0.0) best = i;
  if ((x_of(band[best]) - x_of(band[0])) * outward <= 1e-6) return;
  for (std::size_t i = 1; i <= best; ++i) spur.push_back(world(x_of(band[i]), band[i].y));
  for (std::size_t i = best; i-- > 1;) spur.push_back(world(x_of(band[i]), band[i].y));
  spur.push_back(end);
}

using Connect = std::function<std::vector<geo::Point2>(geo::Point2, geo::Point2)>;

CoveragePlan build(const CellDecomposition& dec, const std::vector<int>& order, double line_spacing, geo::Point2 entry,
                   const Connect& connect) {
  CoveragePlan plan;
  plan.cell_order = order;
  plan.line_spacing = line_spacing;
  auto& pts = plan.waypoints.waypoints;
  auto push = [&](geo::Point2 p, SegmentKind kind) {
    if (!pts.empty()) {
      const geo::Point2 last = pts.back().xy();
      const double len = geo::distance(last, p);
      if (len <= 1e-12) return;
      plan.segment_kinds.push_back(kind);
      (kind == SegmentKind::Survey ? plan.survey_length : plan.connector_length) += len;
    }
    pts.push_back({p.x, p.y, 0.0});
  };
  auto world = [&](double x, double y) { return geo::rotate(geo::Point2{x, y}, dec.sweep_dir); };

  geo::Point2 cur = entry;
  for (int ci : order) {
    const Cell& cell = dec.cells.at(static_cast<std::size_t>(ci));
    if (cell.trapezoids.empty()) continue;
    const double y_lo = cell.trapezoids.front().y_lo;
    const double y_hi = cell.trapezoids.back().y_hi;
    struct Line {
      geo::Point2 left, right;
      std::vector<geo::Point2> left_spur, right_spur;  // out and back along the cell side
    };
    std::vector<Line> lines;
    for (double y : line_offsets(y_lo, y_hi, line_spacing)) {
      double xl = 0.0, xr = 0.0;
      if (!cell_span(cell, y, xl, xr)) continue;
      Line l{world(xl, y), world(xr, y), {}, {}};
      // Where a side slopes outward within half a spacing of the line, the
      // line alone leaves a wedge uncovered; trace the side to its outermost
      // point in the band and return.
      for (double dir : {1.0, -1.0}) {
        const auto band = side_band(cell, y, std::clamp(y + dir * 0.5 * line_spacing, y_lo, y_hi));
        append_spur(band, true, world, l.left, l.left_spur);
        append_spur(band, false, world, l.right, l.right_spur);
      }
      lines.push_back(std::move(l));
    }
    if (lines.empty()) continue;

    // Start options: bottom/top line, entering from its left/right end.
    int best = 0;
    double best_d = 0.0;
    for (int opt = 0; opt < 4; ++opt) {
      const Line& l = (opt < 2) ? lines.front() : lines.back();
      const geo::Point2 s = (opt % 2 == 0) ? l.left : l.right;
      const double d = geo::distance(cur, s);
      if (opt == 0 || d < best_d - 1e-12) {
        best = opt;
        best_d = d;
      }
    }
    if (best >= 2) std::reverse(lines.begin(), lines.end());
    bool from_left = best % 2 == 0;
    for (const Line& l : lines) {
      const geo::Point2 s = from_left ? l.left : l.right;
      const geo::Point2 e = from_left ? l.right : l.left;
      if (pts.empty()) {
        push(s, SegmentKind::Connector);
      } else {
        const auto path = connect(pts.back().xy(), s);
        for (std::size_t k = 1; k < path.size(); ++k) push(path[k], SegmentKind::Connector);
      }
      for (const auto& q : from_left ? l.left_spur : l.right_spur) push(q, SegmentKind::Survey);
      push(e, SegmentKind::Survey);
      for (const auto& q : from_left ? l.right_spur : l.left_spur) push(q, SegmentKind::Survey);
      from_left = !from_left;
    }
    cur = pts.back().xy();
  }
  if (pts.size() < 2) fail(ErrorCode::Geometry, "region too small to plan a coverage trajectory");
  return plan;
}

Connect connector_for(std::vector<const VisibilityGraph*> graphs) {
  return [graphs](geo::Point2 a, geo::Point2 b) {
    for (const auto* g : graphs)
      if (g->space().segment_free(a, b)) return std::vector<geo::Point2>{a, b};
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      try {
        return graphs[i]->shortest_path(a, b);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Unreachable || i + 1 == graphs.size()) throw;
      }
    }
    fail(ErrorCode::Unreachable, "no connector available");
  };
}

}  // namespace

CoveragePlan coverage_trajectory(const CellDecomposition& dec, const std::vector<int>& order, double line_spacing,
                                 geo::Point2 entry, const VisibilityGraph& graph) {
  return build(dec, order, line_spacing, entry, connector_for({&graph}));
}

CoveragePlan coverage_trajectory(const CellDecomposition& dec, const std::vector<int>& order, double line_spacing,
                                 geo::Point2 entry) {
  // Cells only touch along shared edges; merge them for the connector space.
  namespace bg = boost::geometry;
  geo::bgx::BMulti merged;
  for (const auto& c : dec.cells) {
    geo::bgx::BMulti next;
    bg::union_(merged, geo::bgx::to_bpolygon({c.polygon, {}}), next);
    merged = std::move(next);
  }
  FreeSpace fs;
  fs.bounded = true;
  for (const auto& p : merged) {
    auto rp = geo::bgx::from_bpolygon(p);
    geo::normalize_orientation(rp);
    fs.regions.push_back(std::move(rp));
  }
  const VisibilityGraph graph(std::move(fs));
  return coverage_trajectory(dec, order, line_spacing, entry, graph);
}

std::vector<geo::RegionPolygon> free_space_parts(const geo::RegionPolygon& region, double clearance) {
  if (clearance < 0.0) fail(ErrorCode::Config, "clearance must be >= 0");
  geo::bgx::BMulti in;
  in.push_back(geo::bgx::to_bpolygon(region));
  std::vector<geo::RegionPolygon> out;
  for (const auto& p : geo::bgx::buffer_mitre(in, -clearance)) {
    if (boost::geometry::area(p) < 1e-3) continue;
    auto rp = geo::bgx::from_bpolygon(p);
    geo::normalize_orientation(rp);
    out.push_back(std::move(rp));
  }
  return out;
}

namespace {

int nearest_cell(const CellDecomposition& dec, geo::Point2 p) {
  int best = 0;
  double best_d = 0.0;
  for (std::size_t i = 0; i < dec.cells.size(); ++i) {
    const auto& ring = dec.cells[i].polygon;
    const double d = geo::point_in_ring(ring, p) ? 0.0 : geo::point_ring_distance(ring, p);
    if (i == 0 || d < best_d) {
      best = static_cast<int>(i);
      best_d = d;
    }
  }
  return best;
}

}  // namespace

RegionPlan plan_region(const geo::RegionPolygon& region, const CoverageConfig& cfg, geo::Point2 entry) {
  if (!(cfg.line_spacing > 0.0)) fail(ErrorCode::Config, "line spacing must be positive");
  RegionPlan rp;
  rp.region = region;
  geo::normalize_orientation(rp.region);

  auto attempt = [&](double clearance) {
    rp.clearance = clearance;
    rp.free_space = clearance > 0.0 ? free_space_parts(rp.region, clearance) : std::vector<geo::RegionPolygon>{rp.region};
    if (rp.free_space.empty()) return false;
    const double dir = cfg.sweep_dir ? *cfg.sweep_dir : auto_sweep_direction(rp.free_space);
    rp.decomposition = decompose_parts(rp.free_space, dir);
    const auto order = order_cells(rp.decomposition, nearest_cell(rp.decomposition, entry));

    FreeSpace inner;
    inner.bounded = true;
    inner.regions = rp.free_space;
    const VisibilityGraph g_inner(std::move(inner));
    std::vector<const VisibilityGraph*> graphs{&g_inner};
    std::optional<VisibilityGraph> g_outer;
    if (clearance > 0.0 && rp.free_space.size() > 1) {
      // Separate parts are joined through the region without clearance.
      FreeSpace outer;
      outer.bounded = true;
      outer.regions = {rp.region};
      g_outer.emplace(std::move(outer));
      graphs.push_back(&*g_outer);
    }
    rp.plan = build(rp.decomposition, order, cfg.line_spacing, entry, connector_for(graphs));
    return true;
  };

  bool ok = false;
  if (cfg.clearance > 0.0) {
    try {
      ok = attempt(cfg.clearance);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Unreachable && e.code() != ErrorCode::Geometry) throw;
      ok = false;
    }
  }
  if (!ok) attempt(0.0);
  rp.plan.waypoints.speed = cfg.speed;
  rp.plan.waypoints.sampling_period = cfg.sampling_period;
  return rp;
}

CoveragePlan reversed(const CoveragePlan& plan) {
  CoveragePlan out = plan;
  std::reverse(out.cell_order.begin(), out.cell_order.end());
  std::reverse(out.waypoints.waypoints.begin(), out.waypoints.waypoints.end());
  std::reverse(out.segment_kinds.begin(), out.segment_kinds.end());
  return out;
}

nlohmann::json region_plan_to_json(const RegionPlan& p) {
  using nlohmann::json;
  json cells = json::array();
  for (const auto& c : p.decomposition.cells) cells.push_back({{"polygon", geo::ring_to_json(c.polygon)}, {"area", c.area}});
  json free_space = json::array();
  for (const auto& f : p.free_space) free_space.push_back(geo::polygon_to_json(f));
  json kinds = json::array();
  for (auto k : p.plan.segment_kinds) kinds.push_back(to_string(k));
  return json{{"region", geo::polygon_to_json(p.region)},
              {"free_space", free_space},
              {"clearance", p.clearance},
              {"sweep_dir", p.decomposition.sweep_dir},
              {"cells", cells},
              {"adjacency", p.decomposition.adjacency},
              {"order", p.plan.cell_order},
              {"line_spacing", p.plan.line_spacing},
              {"trajectory", geo::trajectory_to_json(p.plan.waypoints)},
              {"segment_kinds", kinds},
              {"survey_length", p.plan.survey_length},
              {"connector_length", p.plan.connector_length},
              {"total_length", p.plan.survey_length + p.plan.connector_length}};
}

RegionPlan region_plan_from_json(const nlohmann::json& j) {
  RegionPlan p;
  p.region = geo::polygon_from_json(j.at("region"));
  for (const auto& f : j.at("free_space")) p.free_space.push_back(geo::polygon_from_json(f));
  p.clearance = j.at("clearance").get<double>();
  p.decomposition.sweep_dir = j.at("sweep_dir").get<double>();
  for (const auto& c : j.at("cells")) {
    Cell cell;
    cell.polygon = geo::ring_from_json(c.at("polygon"));
    cell.area = c.at("area").get<double>();
    p.decomposition.cells.push_back(std::move(cell));
  }
  p.decomposition.adjacency = j.at("adjacency").get<std::vector<std::vector<int>>>();
  p.plan.cell_order = j.at("order").get<std::vector<int>>();
  p.plan.line_spacing = j.at("line_spacing").get<double>();
  p.plan.waypoints = geo::trajectory_from_json(j.at("trajectory"));
  for (const auto& k : j.at("segment_kinds"))
    p.plan.segment_kinds.push_back(k.get<std::string>() == "survey" ? SegmentKind::Survey : SegmentKind::Connector);
  p.plan.survey_length = j.at("survey_length").get<double>();
  p.plan.connector_length = j.at("connector_length").get<double>();
  return p;
}

}  // namespace radsurvey::coverage

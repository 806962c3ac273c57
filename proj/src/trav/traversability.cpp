#include "radsurvey/trav/traversability.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "radsurvey/error.hpp"
#include "radsurvey/geo/boost_adapt.hpp"
#include "radsurvey/geo/geometry.hpp"
#include "radsurvey/geo/io.hpp"
#include "radsurvey/gridding/hotspots.hpp"
#include "radsurvey/gridding/raster.hpp"

namespace radsurvey::trav {

ObstacleMap obstacle_map(const geo::Dem& dem, const ObstacleConfig& cfg) {
  if (!(cfg.max_slope_deg > 0.0 && cfg.max_slope_deg < 90.0)) fail(ErrorCode::Config, "max slope must be in (0, 90) degrees");
  if (cfg.max_step < 0.0) fail(ErrorCode::Config, "max step must be >= 0");
  const auto& dg = dem.geometry();
  const double ratio = cfg.pixel_size / dg.cell_size;
  const int k = static_cast<int>(std::lround(ratio));
  if (k < 1 || std::abs(ratio - k) > 1e-6) fail(ErrorCode::Config, "pixel size must be an integer multiple of the DEM cell size");

  geo::GridGeometry og;
  og.origin_x = dg.origin_x;
  og.origin_y = dg.origin_y;
  og.cell_size = k * dg.cell_size;
  og.rows = dg.rows / k;
  og.cols = dg.cols / k;
  if (og.rows < 1 || og.cols < 1) fail(ErrorCode::Config, "DEM smaller than one obstacle pixel");

  const double slope = std::tan(cfg.max_slope_deg * std::numbers::pi / 180.0);
  ObstacleMap out{geo::BinaryGrid(og), std::vector<float>(og.size(), 0.0f)};
  // Pair thresholds for every relative offset inside the widened block.
  std::vector<double> cut_by_offset;
  const int span = k + 2;
  cut_by_offset.resize(static_cast<std::size_t>(span * span));
  for (int dr = 0; dr < span; ++dr)
    for (int dc = 0; dc < span; ++dc)
      cut_by_offset[static_cast<std::size_t>(dr * span + dc)] =
          std::max(slope * std::hypot(dr, dc) * dg.cell_size, cfg.max_step);

  std::vector<double> h;
  for (int R = 0; R < og.rows; ++R) {
    for (int C = 0; C < og.cols; ++C) {
      const int r0 = std::max(0, R * k - 1);
      const int r1 = std::min(dg.rows - 1, R * k + k);
      const int c0 = std::max(0, C * k - 1);
      const int c1 = std::min(dg.cols - 1, C * k + k);
      std::size_t pairs = 0;
      std::size_t bad = 0;
      const int w = c1 - c0 + 1;
      const int n = (r1 - r0 + 1) * w;
      h.resize(static_cast<std::size_t>(n));
      for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c) h[static_cast<std::size_t>((r - r0) * w + (c - c0))] = dem.at(r, c);
      for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
          const int dr = std::abs(b / w - a / w);
          const int dc = std::abs(b % w - a % w);
          ++pairs;
          if (std::abs(h[static_cast<std::size_t>(a)] - h[static_cast<std::size_t>(b)]) >
              cut_by_offset[static_cast<std::size_t>(dr * span + dc)])
            ++bad;
        }
      }
      const std::size_t idx = og.index(R, C);
      out.grid.occupied[idx] = bad > 0 ? 1 : 0;
      out.violation_fraction[idx] = pairs ? static_cast<float>(static_cast<double>(bad) / static_cast<double>(pairs)) : 0.0f;
    }
  }
  return out;
}

FusedMap fuse_maps(const geo::BinaryGrid& roi, const geo::BinaryGrid& obstacles) {
  const auto& g = roi.geometry;
  const auto& o = obstacles.geometry;
  if (g.max_x() <= o.origin_x || o.max_x() <= g.origin_x || g.max_y() <= o.origin_y || o.max_y() <= g.origin_y)
    fail(ErrorCode::Extent, "ROI and obstacle maps do not overlap");
  FusedMap out{roi, std::vector<std::uint8_t>(g.size(), 0)};
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      const std::size_t i = g.index(r, c);
      std::uint8_t prov = roi.occupied[i] ? kOutsideRoi : 0;
      const geo::Point2 p = g.center(r, c);
      const auto cell = o.cell_of(p.x, p.y);
      if (!cell || obstacles.at(cell->row, cell->col)) prov |= kTerrain;
      out.provenance[i] = prov;
      out.grid.occupied[i] = prov ? 1 : 0;
    }
  }
  return out;
}

FusedMap apply_manual_obstacles(const FusedMap& fused, const std::vector<geo::RegionPolygon>& polys) {
  FusedMap out = fused;
  const auto& g = out.grid.geometry;
  for (const auto& poly : polys) {
    if (poly.envelope.size() < 3) fail(ErrorCode::Validity, "manual obstacle needs at least 3 vertices");
    const geo::BBox box = geo::bounding_box(poly.envelope);
    const int c0 = std::max(0, static_cast<int>(std::floor((box.min_x - g.origin_x) / g.cell_size - 0.5)));
    const int c1 = std::min(g.cols - 1, static_cast<int>(std::ceil((box.max_x - g.origin_x) / g.cell_size)));
    const int r0 = std::max(0, static_cast<int>(std::floor((box.min_y - g.origin_y) / g.cell_size - 0.5)));
    const int r1 = std::min(g.rows - 1, static_cast<int>(std::ceil((box.max_y - g.origin_y) / g.cell_size)));
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        const geo::Point2 p = g.center(r, c);
        if (!geo::point_in_region(poly, p.x, p.y)) continue;
        const std::size_t i = g.index(r, c);
        out.provenance[i] |= kManual;
        out.grid.occupied[i] = 1;
      }
    }
  }
  return out;
}

geo::BinaryGrid roi_grid(const geo::GridGeometry& g, const std::vector<geo::RegionPolygon>& rois) {
  geo::BinaryGrid out(g, true);
  for (const auto& roi : rois) {
    const geo::BBox box = geo::bounding_box(roi.envelope);
    for (int r = 0; r < g.rows; ++r) {
      for (int c = 0; c < g.cols; ++c) {
        const geo::Point2 p = g.center(r, c);
        if (p.x < box.min_x || p.x > box.max_x || p.y < box.min_y || p.y > box.max_y) continue;
        if (geo::point_in_region(roi, p.x, p.y)) out.set(r, c, false);
      }
    }
  }
  return out;
}

geo::BinaryGrid obstacle_layer(const FusedMap& fused) {
  geo::BinaryGrid out(fused.grid.geometry);
  for (std::size_t i = 0; i < out.occupied.size(); ++i)
    out.occupied[i] = (fused.provenance[i] & (kTerrain | kManual)) ? 1 : 0;
  return out;
}

namespace {

bool valid_polygon(const geo::RegionPolygon& p) {
  if (p.envelope.size() < 3) return false;
  for (const auto& h : p.holes)
    if (h.size() < 3) return false;
  const auto bp = geo::bgx::to_bpolygon(p);
  return boost::geometry::is_valid(bp);
}

}  // namespace

std::vector<geo::RegionPolygon> extract_regions(const FusedMap& fused, const RegionConfig& cfg) {
  if (cfg.max_vertices < 3) fail(ErrorCode::Config, "max_vertices must be >= 3");
  const auto& g = fused.grid.geometry;
  const double min_area = cfg.min_area > 0.0 ? cfg.min_area : 4.0 * g.cell_size * g.cell_size;
  gridding::Mask free(g.size());
  for (std::size_t i = 0; i < free.size(); ++i) free[i] = fused.grid.occupied[i] ? 0 : 1;
  const auto comps = gridding::label_components(g, free, gridding::Connectivity::Eight);

  std::vector<geo::RegionPolygon> out;
  for (const auto& cells : comps.cells) {
    if (static_cast<double>(cells.size()) * g.cell_size * g.cell_size < min_area) continue;
    gridding::Mask mask(g.size(), 0);
    for (std::size_t c : cells) mask[c] = 1;
    geo::RegionPolygon raw;
    double outer_area = 0.0;
    for (auto& ring : gridding::contour_mask(g, mask)) {
      const double a = geo::signed_area(ring);
      if (a > outer_area) {
        if (!raw.envelope.empty()) fail(ErrorCode::Geometry, "component has more than one outer boundary");
        outer_area = a;
        raw.envelope = std::move(ring);
      } else if (a < 0.0) {
        raw.holes.push_back(std::move(ring));
      }
    }
    if (raw.envelope.empty()) continue;

    geo::RegionPolygon simplified;
    for (int budget = cfg.max_vertices;; budget *= 2) {
      simplified.envelope = gridding::simplify_polygon(raw.envelope, budget);
      simplified.holes.clear();
      for (const auto& h : raw.holes) simplified.holes.push_back(gridding::simplify_polygon(h, budget));
      if (valid_polygon(simplified)) break;
      std::size_t largest = raw.envelope.size();
      for (const auto& h : raw.holes) largest = std::max(largest, h.size());
      if (static_cast<std::size_t>(budget) >= largest) {
        simplified = raw;
        break;
      }
    }
    geo::normalize_orientation(simplified);
    out.push_back(std::move(simplified));
  }
  return out;
}

nlohmann::json fused_map_to_json(const FusedMap& m) {
  nlohmann::json j = geo::binary_grid_to_json(m.grid);
  // Provenance as run-length pairs [value, count] over the row-major cells.
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t i = 0; i < m.provenance.size();) {
    std::size_t e = i;
    while (e < m.provenance.size() && m.provenance[e] == m.provenance[i]) ++e;
    runs.push_back({m.provenance[i], e - i});
    i = e;
  }
  j["provenance_rle"] = runs;
  j["provenance_bits"] = {{"terrain", kTerrain}, {"outside_roi", kOutsideRoi}, {"manual", kManual}};
  return j;
}

FusedMap fused_map_from_json(const nlohmann::json& j) {
  FusedMap m;
  m.grid = geo::binary_grid_from_json(j);
  m.provenance.reserve(m.grid.occupied.size());
  for (const auto& run : j.at("provenance_rle")) {
    const auto v = run.at(0).get<std::uint8_t>();
    const auto n = run.at(1).get<std::size_t>();
    m.provenance.insert(m.provenance.end(), n, v);
  }
  if (m.provenance.size() != m.grid.occupied.size()) fail(ErrorCode::Io, "provenance length does not match grid");
  return m;
}

nlohmann::json obstacle_map_to_json(const ObstacleMap& m) {
  nlohmann::json j = geo::binary_grid_to_json(m.grid);
  nlohmann::json frac = nlohmann::json::array();
  for (float f : m.violation_fraction) frac.push_back(std::round(static_cast<double>(f) * 1000.0) / 1000.0);
  j["violation_fraction"] = frac;
  return j;
}

}  // namespace radsurvey::trav

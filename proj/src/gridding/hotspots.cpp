#include "radsurvey/gridding/hotspots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "radsurvey/error.hpp"
#include "radsurvey/geo/geometry.hpp"
#include "radsurvey/geo/io.hpp"
#include "radsurvey/gridding/delaunay.hpp"
#include "radsurvey/gridding/raster.hpp"

namespace radsurvey::gridding {

std::vector<sim::Measurement> downsample_by_summing(const std::vector<sim::Measurement>& ms, int n) {
  if (n < 1) fail(ErrorCode::Config, "downsampling factor must be >= 1");
  std::vector<sim::Measurement> out;
  const std::size_t groups = ms.size() / static_cast<std::size_t>(n);
  out.reserve(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    sim::Measurement m{};
    m.z_agl = 0.0;
    bool windows = true;
    sim::WindowCounts w;
    for (int k = 0; k < n; ++k) {
      const auto& s = ms[g * static_cast<std::size_t>(n) + static_cast<std::size_t>(k)];
      m.t += s.t;
      m.x += s.x;
      m.y += s.y;
      m.z_agl += s.z_agl;
      m.counts += s.counts;
      m.dose_rate += s.dose_rate;
      if (s.windows) {
        w.cs += s.windows->cs;
        w.co += s.windows->co;
      } else {
        windows = false;
      }
    }
    m.t /= n;
    m.x /= n;
    m.y /= n;
    m.z_agl /= n;
    m.dose_rate /= n;
    if (windows) m.windows = w;
    out.push_back(m);
  }
  return out;
}

geo::GridMap interpolate_values(const std::vector<geo::Point2>& pts, const std::vector<double>& values,
                                const geo::GridGeometry& g) {
  return rasterize(delaunay(pts, values), g);
}

geo::GridMap interpolate_grid(const std::vector<sim::Measurement>& ms, double cell_size) {
  std::vector<geo::Point2> pts;
  std::vector<double> values;
  for (const auto& m : ms) {
    pts.push_back({m.x, m.y});
    values.push_back(m.counts);
  }
  if (pts.size() < 3) fail(ErrorCode::Geometry, "interpolation needs at least 3 measurements");
  return interpolate_values(pts, values, covering_geometry(pts, cell_size));
}

namespace {

void mean_std(const std::vector<double>& v, double& mu, double& sigma) {
  double sum = 0.0;
  for (double x : v) sum += x;
  mu = sum / static_cast<double>(v.size());
  double sq = 0.0;
  for (double x : v) sq += (x - mu) * (x - mu);
  sigma = std::sqrt(sq / static_cast<double>(v.size()));
}

}  // namespace

ThresholdResult adaptive_thresholds(const std::vector<double>& values) {
  if (values.size() < 2) fail(ErrorCode::Config, "adaptive thresholds need at least 2 values");
  ThresholdResult t;
  mean_std(values, t.mu, t.sigma);
  t.t_bg = t.mu + t.sigma / 2.0;
  std::vector<double> bg;
  for (double v : values)
    if (v <= t.t_bg) bg.push_back(v);
  mean_std(bg, t.mu_bg, t.sigma_bg);
  t.t_hot = t.mu_bg + 3.0 * t.sigma_bg;
  return t;
}

geo::Ring simplify_polygon(const geo::Ring& ring, int max_vertices) {
  if (max_vertices < 3) fail(ErrorCode::Config, "max_vertices must be >= 3");
  geo::Ring cur = ring;
  auto importance = [&](std::size_t i) {
    const std::size_t n = cur.size();
    const geo::Point2 x1 = cur[i] - cur[(i + n - 1) % n];
    const geo::Point2 x2 = cur[(i + 1) % n] - cur[i];
    const double l1 = geo::norm(x1);
    const double l2 = geo::norm(x2);
    if (l1 == 0.0 || l2 == 0.0) return 0.0;
    const double cosang = std::clamp(geo::dot(x1, x2) / (l1 * l2), -1.0, 1.0);
    return std::abs(std::acos(cosang)) * l1 * l2;
  };
  std::vector<double> imp(cur.size());
  for (std::size_t i = 0; i < cur.size(); ++i) imp[i] = importance(i);
  while (static_cast<int>(cur.size()) > max_vertices) {
    const auto it = std::min_element(imp.begin(), imp.end());
    const std::size_t k = static_cast<std::size_t>(it - imp.begin());
    cur.erase(cur.begin() + static_cast<std::ptrdiff_t>(k));
    imp.erase(imp.begin() + static_cast<std::ptrdiff_t>(k));
    const std::size_t n = cur.size();
    const std::size_t prev = (k + n - 1) % n;
    const std::size_t next = k % n;
    imp[prev] = importance(prev);
    imp[next] = importance(next);
  }
  return cur;
}

int count_inside(const geo::Ring& ring, const std::vector<sim::Measurement>& ms) {
  const geo::BBox box = geo::bounding_box(ring);
  int n = 0;
  for (const auto& m : ms) {
    if (m.x < box.min_x || m.x > box.max_x || m.y < box.min_y || m.y > box.max_y) continue;
    if (geo::point_in_ring(ring, {m.x, m.y})) ++n;
  }
  return n;
}

namespace {

// Outer ring of a single 8-connected component.
geo::Ring outer_ring(const geo::GridGeometry& g, const std::vector<std::size_t>& cells) {
  Mask mask(g.size(), 0);
  for (std::size_t c : cells) mask[c] = 1;
  geo::Ring best;
  double best_area = 0.0;
  for (auto& r : contour_mask(g, mask)) {
    const double a = geo::signed_area(r);
    if (a > best_area) {
      best_area = a;
      best = std::move(r);
    }
  }
  return best;
}

}  // namespace

std::vector<Hotspot> extract_hotspots(const geo::GridMap& grid, const ThresholdResult& thr,
                                      const std::vector<sim::Measurement>& raw, const HotspotConfig& cfg) {
  if (cfg.max_vertices < 3) fail(ErrorCode::Config, "max_vertices must be >= 3");
  const auto& g = grid.geometry;
  Mask mask(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) mask[i] = (!grid.no_data[i] && grid.values[i] > thr.t_hot) ? 1 : 0;

  // Validity rule on the raw connected sets.
  Components comps = label_components(g, mask, Connectivity::Eight);
  Mask kept(g.size(), 0);
  for (const auto& cells : comps.cells) {
    const geo::Ring ring = outer_ring(g, cells);
    if (ring.size() < 3 || count_inside(ring, raw) < cfg.min_samples) continue;
    for (std::size_t c : cells) kept[c] = 1;
  }

  // Opening-style smoothing, then re-validation.
  Mask smoothed = dilate(g, erode(g, kept, cfg.erode_radius), cfg.dilate_radius);
  comps = label_components(g, smoothed, Connectivity::Eight);
  std::vector<Hotspot> out;
  for (const auto& cells : comps.cells) {
    geo::Ring ring = outer_ring(g, cells);
    if (ring.size() < 3) continue;
    const int inside = count_inside(ring, raw);
    if (inside < cfg.min_samples) continue;
    Hotspot h;
    h.enclosed_samples = inside;
    h.peak_value = -std::numeric_limits<double>::infinity();
    for (std::size_t c : cells)
      if (!grid.no_data[c]) h.peak_value = std::max(h.peak_value, grid.values[c]);
    h.polygon.envelope = simplify_polygon(ring, cfg.max_vertices);
    h.contour = std::move(ring);
    out.push_back(std::move(h));
  }
  return out;
}

nlohmann::json thresholds_to_json(const ThresholdResult& t) {
  return {{"t_bg", t.t_bg}, {"t_hot", t.t_hot}, {"mu", t.mu}, {"sigma", t.sigma}, {"mu_bg", t.mu_bg}, {"sigma_bg", t.sigma_bg}};
}

nlohmann::json hotspots_to_json(const std::vector<Hotspot>& hs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& h : hs)
    arr.push_back({{"contour", geo::ring_to_json(h.contour)},
                   {"polygon", geo::polygon_to_json(h.polygon)},
                   {"peak_value", h.peak_value},
                   {"enclosed_samples", h.enclosed_samples}});
  return arr;
}

std::vector<Hotspot> hotspots_from_json(const nlohmann::json& j) {
  std::vector<Hotspot> out;
  for (const auto& e : j) {
    Hotspot h;
    h.contour = geo::ring_from_json(e.at("contour"));
    h.polygon = geo::polygon_from_json(e.at("polygon"));
    h.peak_value = e.at("peak_value").get<double>();
    h.enclosed_samples = e.at("enclosed_samples").get<int>();
    out.push_back(std::move(h));
  }
  return out;
}

}  // namespace radsurvey::gridding

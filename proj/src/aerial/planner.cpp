#include "radsurvey/aerial/planner.hpp"

#include <algorithm>
#include <cmath>

#include "radsurvey/error.hpp"
#include "radsurvey/geo/geometry.hpp"

namespace radsurvey::aerial {

double worst_case_distance(double strip_spacing, double height) {
  if (strip_spacing < 0.0) fail(ErrorCode::Domain, "strip spacing must be >= 0");
  if (!(height > 0.0)) fail(ErrorCode::Domain, "flight height must be positive");
  return std::hypot(0.5 * strip_spacing, height);
}

geo::Trajectory plan_strips(const StripPlanConfig& cfg) {
  if (!(cfg.strip_spacing > 0.0)) fail(ErrorCode::Config, "strip spacing must be positive");
  if (!(cfg.speed > 0.0) || !(cfg.sampling_period > 0.0))
    fail(ErrorCode::Config, "speed and sampling period must be positive");
  if (cfg.area.envelope.size() < 3) fail(ErrorCode::Validity, "strip area needs at least 3 vertices");

  // Work in a frame where strips run along +u.
  const geo::Ring local = geo::rotate(cfg.area.envelope, -cfg.heading);
  const geo::BBox box = geo::bounding_box(local);
  const double width = box.max_y - box.min_y;
  const double A = cfg.strip_spacing;

  std::vector<double> offsets;
  if (width < A) {
    offsets.push_back(box.min_y + 0.5 * width);
  } else {
    const int n = static_cast<int>(std::floor(width / A + 1e-9)) + 1;
    // The last inset line falls beyond the far edge when width mod A < A/2;
    // it is pulled back onto the edge so the count formula holds.
    for (int k = 0; k < n; ++k) offsets.push_back(std::min(box.min_y + 0.5 * A + k * A, box.max_y));
  }

  const double z = cfg.altitude_mode == AltitudeMode::FixedMsl ? cfg.altitude : 0.0;
  geo::Trajectory traj;
  traj.speed = cfg.speed;
  traj.sampling_period = cfg.sampling_period;
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    // Clip the line to the area along u.
    const double v = offsets[k];
    double u_lo = box.max_x;
    double u_hi = box.min_x;
    for (std::size_t i = 0; i < local.size(); ++i) {
      const geo::Point2 a = local[i];
      const geo::Point2 b = local[(i + 1) % local.size()];
      if ((a.y - v) * (b.y - v) > 0.0) continue;
      if (a.y == b.y) {
        u_lo = std::min({u_lo, a.x, b.x});
        u_hi = std::max({u_hi, a.x, b.x});
        continue;
      }
      const double u = a.x + (v - a.y) / (b.y - a.y) * (b.x - a.x);
      u_lo = std::min(u_lo, u);
      u_hi = std::max(u_hi, u);
    }
    if (u_lo > u_hi) continue;
    geo::Point2 p0{u_lo, v};
    geo::Point2 p1{u_hi, v};
    if (k % 2 == 1) std::swap(p0, p1);
    for (const auto& p : {p0, p1}) {
      const geo::Point2 w = geo::rotate(p, cfg.heading);
      traj.waypoints.push_back({w.x, w.y, z});
    }
  }
  traj.validate();
  return traj;
}

geo::Trajectory adjust_terrain_following(const geo::Trajectory& traj2d, const geo::Dem& dem,
                                         const TerrainFollowConfig& cfg) {
  traj2d.validate();
  if (!(cfg.agl_height > 0.0)) fail(ErrorCode::Config, "AGL height must be positive");
  if (!(cfg.segment_size > 0.0)) fail(ErrorCode::Config, "segment size must be positive");
  if (cfg.filter_window < 1 || cfg.filter_window % 2 == 0) fail(ErrorCode::Config, "filter window must be odd and >= 1");

  // Step 1: segmentation.
  std::vector<geo::Point2> pts;
  pts.push_back(traj2d.waypoints.front().xy());
  for (std::size_t i = 1; i < traj2d.waypoints.size(); ++i) {
    const geo::Point2 a = traj2d.waypoints[i - 1].xy();
    const geo::Point2 b = traj2d.waypoints[i].xy();
    const double len = geo::distance(a, b);
    if (len == 0.0) continue;
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / cfg.segment_size - 1e-9)));
    for (int k = 1; k < pieces; ++k) pts.push_back(a + (static_cast<double>(k) / pieces) * (b - a));
    pts.push_back(b);
  }

  // Step 2: terrain height under each point.
  const auto mode = cfg.nearest_sampling ? geo::SampleMode::Nearest : geo::SampleMode::Bilinear;
  std::vector<double> terrain(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) terrain[i] = geo::dem_sample(dem, pts[i].x, pts[i].y, mode);

  // Step 3: low-pass filter.
  const int half = cfg.filter_window / 2;
  const int n = static_cast<int>(pts.size());
  geo::Trajectory out;
  out.speed = traj2d.speed;
  out.sampling_period = traj2d.sampling_period;
  out.waypoints.reserve(pts.size());
  for (int i = 0; i < n; ++i) {
    const int w = std::min({half, i, n - 1 - i});
    double sum = 0.0;
    for (int k = i - w; k <= i + w; ++k) sum += terrain[static_cast<std::size_t>(k)];
    const double smoothed = sum / (2 * w + 1);
    out.waypoints.push_back({pts[static_cast<std::size_t>(i)].x, pts[static_cast<std::size_t>(i)].y,
                             smoothed + cfg.agl_height});
  }
  return out;
}

AglProfile agl_profile(const geo::Trajectory& traj3d, const geo::Dem& dem, double target_height, double step) {
  traj3d.validate();
  AglProfile prof;
  auto add = [&](double s, const geo::Point3& p) {
    prof.samples.push_back({s, p.z - geo::dem_sample(dem, p.x, p.y)});
  };
  double s = 0.0;
  add(0.0, traj3d.waypoints.front());
  for (std::size_t i = 1; i < traj3d.waypoints.size(); ++i) {
    const auto& a = traj3d.waypoints[i - 1];
    const auto& b = traj3d.waypoints[i];
    const double len = geo::distance(a.xy(), b.xy());
    if (step > 0.0) {
      const int pieces = std::max(1, static_cast<int>(std::ceil(len / step - 1e-9)));
      for (int k = 1; k < pieces; ++k) {
        const double f = static_cast<double>(k) / pieces;
        add(s + f * len, {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y), a.z + f * (b.z - a.z)});
      }
    }
    s += len;
    add(s, b);
  }
  double sq = 0.0;
  for (const auto& smp : prof.samples) {
    const double d = smp.agl - target_height;
    sq += d * d;
    prof.max_abs_deviation = std::max(prof.max_abs_deviation, std::abs(d));
  }
  prof.rms_deviation = std::sqrt(sq / static_cast<double>(prof.samples.size()));
  return prof;
}

}  // namespace radsurvey::aerial

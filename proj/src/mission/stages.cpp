#include "stages.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "radsurvey/aerial/planner.hpp"
#include "radsurvey/coverage/planner.hpp"
#include "radsurvey/error.hpp"
#include "radsurvey/geo/geometry.hpp"
#include "radsurvey/geo/io.hpp"
#include "radsurvey/gridding/hotspots.hpp"
#include "radsurvey/gridding/raster.hpp"
#include "radsurvey/loc/localization.hpp"
#include "radsurvey/route/astar.hpp"
#include "radsurvey/sim/terrain.hpp"
#include "radsurvey/trav/traversability.hpp"

namespace radsurvey::mission::detail {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string dump(json j, const std::string& hash) {
  j["config_hash"] = hash;
  return j.dump();
}

json parse(const std::string& bytes) { return json::parse(bytes); }

std::string csv_with_hash(const std::vector<sim::Measurement>& ms, const std::string& hash) {
  return "# config_hash=" + hash + "\n" + sim::measurements_to_csv(ms);
}

geo::Dem load_terrain(const StageContext& ctx) { return geo::dem_from_json(parse(ctx.artifact(Stage::TerrainReady))); }

std::vector<geo::RegionPolygon> load_rois(const StageContext& ctx) {
  return geo::polygons_from_json(parse(ctx.artifact(Stage::RoisDetected)).at("rois"));
}

trav::FusedMap load_fused(const StageContext& ctx) {
  return trav::fused_map_from_json(parse(ctx.artifact(Stage::ObstaclesReady)).at("fused"));
}

double mean_height(const std::vector<sim::Measurement>& ms) {
  double s = 0.0;
  for (const auto& m : ms) s += m.z_agl;
  return ms.empty() ? 0.0 : s / static_cast<double>(ms.size());
}

std::vector<sim::Measurement> inside(const std::vector<sim::Measurement>& ms, const geo::RegionPolygon& p) {
  std::vector<sim::Measurement> out;
  for (const auto& m : ms)
    if (geo::point_in_region(p, m.x, m.y)) out.push_back(m);
  return out;
}

json error_json(const Error& e) { return {{"code", std::string(to_string(e.code()))}, {"message", e.what()}}; }

json rings_json(const std::vector<geo::Ring>& rings) {
  json a = json::array();
  for (const auto& r : rings) a.push_back(geo::ring_to_json(r));
  return a;
}

}  // namespace

geo::RegionPolygon survey_area(const sim::Scenario& sc) {
  if (sc.extra.contains("survey_area")) return geo::polygon_from_json(sc.extra.at("survey_area"));
  const auto& t = sc.terrain;
  return {{{t.origin_x, t.origin_y}, {t.origin_x + t.width, t.origin_y},
           {t.origin_x + t.width, t.origin_y + t.height}, {t.origin_x, t.origin_y + t.height}},
          {}};
}

std::string embedded_hash(const std::string& bytes) {
  static const std::string csv_key = "# config_hash=";
  if (bytes.rfind(csv_key, 0) == 0) {
    const auto end = bytes.find('\n');
    return bytes.substr(csv_key.size(), end - csv_key.size());
  }
  static const std::string key = "\"config_hash\":\"";
  const auto pos = bytes.find(key);
  if (pos == std::string::npos) return {};
  const auto start = pos + key.size();
  return bytes.substr(start, bytes.find('"', start) - start);
}

std::string produce_terrain(const StageContext& ctx) {
  const geo::Dem dem = sim::synth_terrain(ctx.scenario.terrain);
  return dump(geo::dem_to_json(dem), ctx.config_hash);
}

std::string produce_aerial_plan(const StageContext& ctx) {
  const auto& a = ctx.config.aerial;
  const geo::Dem dem = load_terrain(ctx);
  aerial::StripPlanConfig sp;
  sp.area = survey_area(ctx.scenario);
  sp.strip_spacing = a.strip_spacing;
  sp.heading = a.heading_deg * kDeg;
  sp.speed = a.speed;
  sp.sampling_period = a.sampling_period;
  sp.altitude_mode = aerial::AltitudeMode::Agl;
  sp.altitude = a.agl_height;
  const geo::Trajectory strips = aerial::plan_strips(sp);
  aerial::TerrainFollowConfig tf{a.agl_height, a.segment_size, a.filter_window, a.nearest_sampling};
  const geo::Trajectory traj = aerial::adjust_terrain_following(strips, dem, tf);
  const auto profile = aerial::agl_profile(traj, dem, a.agl_height, 1.0);
  return dump({{"area", geo::polygon_to_json(sp.area)},
               {"strips", geo::trajectory_to_json(strips)},
               {"trajectory", geo::trajectory_to_json(traj)},
               {"waypoint_count", traj.waypoints.size()},
               {"worst_case_distance", aerial::worst_case_distance(a.strip_spacing, a.agl_height)},
               {"agl_rms_deviation", profile.rms_deviation},
               {"agl_max_abs_deviation", profile.max_abs_deviation}},
              ctx.config_hash);
}

std::string produce_aerial_survey(const StageContext& ctx) {
  const geo::Dem dem = load_terrain(ctx);
  const geo::Trajectory traj = geo::trajectory_from_json(parse(ctx.artifact(Stage::AerialPlanned)).at("trajectory"));
  sim::SurveyOptions opts;
  opts.mode = sim::HeightMode::Aerial;
  opts.seed = ctx.config.seed;
  return csv_with_hash(sim::simulate_survey(ctx.scenario.field, dem, traj, opts), ctx.config_hash);
}

std::string produce_rois(const StageContext& ctx) {
  const auto& rc = ctx.config.roi;
  const auto raw = sim::measurements_from_csv(ctx.artifact(Stage::AerialSurveyed));
  const auto down = gridding::downsample_by_summing(raw, rc.downsample);
  const geo::GridMap map = gridding::interpolate_grid(down, rc.grid_cell);
  std::vector<double> values;
  if (rc.basis == loc::ThresholdBasis::Measurements) {
    for (const auto& m : down) values.push_back(m.counts);
  } else {
    for (std::size_t i = 0; i < map.values.size(); ++i)
      if (!map.no_data[i]) values.push_back(map.values[i]);
  }
  const auto thr = gridding::adaptive_thresholds(values);
  const auto hotspots = gridding::extract_hotspots(map, thr, raw, rc.hotspot);
  double margin = rc.margin;
  if (auto m = ctx.input(kRoiMargin)) margin = m->at("margin").get<double>();
  std::vector<geo::RegionPolygon> polys;
  for (const auto& h : hotspots) polys.push_back(h.polygon);
  const auto rois = enlarge_rois(polys, margin);
  json rois_json = json::array();
  for (const auto& r : rois) rois_json.push_back(geo::polygon_to_json(r));
  return dump({{"thresholds", gridding::thresholds_to_json(thr)},
               {"downsampled_count", down.size()},
               {"map", geo::grid_map_to_json(map)},
               {"hotspots", gridding::hotspots_to_json(hotspots)},
               {"margin", margin},
               {"rois", rois_json}},
              ctx.config_hash);
}

std::string produce_obstacles(const StageContext& ctx) {
  const geo::Dem dem = load_terrain(ctx);
  const auto rois = load_rois(ctx);
  const trav::ObstacleMap obstacles = trav::obstacle_map(dem, ctx.config.obstacles);
  const geo::BinaryGrid roi = trav::roi_grid(dem.geometry(), rois);
  trav::FusedMap fused = trav::fuse_maps(roi, obstacles.grid);
  std::vector<geo::RegionPolygon> manual;
  if (auto m = ctx.input(kManualObstacles)) manual = geo::polygons_from_json(m->at("polygons"));
  if (!manual.empty()) fused = trav::apply_manual_obstacles(fused, manual);
  json manual_json = json::array();
  for (const auto& p : manual) manual_json.push_back(geo::polygon_to_json(p));
  return dump({{"obstacle_map", trav::obstacle_map_to_json(obstacles)},
               {"fused", trav::fused_map_to_json(fused)},
               {"manual_obstacles", manual_json}},
              ctx.config_hash);
}

std::string produce_validation(const StageContext& ctx) {
  const auto record = ctx.input(kValidateObstacles);
  if (!record) fail(ErrorCode::Sequencing, "obstacle map has not been validated by the operator");
  const std::string digest = sha256_hex(ctx.artifact(Stage::ObstaclesReady));
  if (record->contains("obstacles_sha256") && record->at("obstacles_sha256").get<std::string>() != digest)
    fail(ErrorCode::StaleConfig, "the operator validated a different obstacle map");
  return dump({{"obstacles_sha256", digest}, {"confirmation", *record}}, ctx.config_hash);
}

std::string produce_coverage(const StageContext& ctx) {
  const auto fused = load_fused(ctx);
  const auto rois = load_rois(ctx);
  const auto regions = trav::extract_regions(fused, ctx.config.regions);
  coverage::CoverageConfig cc;
  cc.line_spacing = ctx.config.ground.line_spacing;
  cc.clearance = ctx.config.ground.clearance;
  cc.speed = ctx.config.ground.speed;
  cc.sampling_period = ctx.config.ground.sampling_period;
  json sweep = nullptr;
  if (auto s = ctx.input(kSweepDir); s && !s->at("sweep_dir_deg").is_null()) {
    sweep = s->at("sweep_dir_deg");
    cc.sweep_dir = s->at("sweep_dir_deg").get<double>() * kDeg;
  }
  json out = json::array();
  for (const auto& region : regions) {
    // Entry: south-western envelope vertex; routing may reverse the plan.
    const auto& env = region.envelope;
    const geo::Point2 entry = *std::min_element(env.begin(), env.end(), [](geo::Point2 a, geo::Point2 b) {
      return a.y < b.y || (a.y == b.y && a.x < b.x);
    });
    int roi_index = -1;
    const geo::Point2 probe = env.front();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rois.size(); ++i) {
      const double d = geo::point_in_region(rois[i], probe.x, probe.y) ? 0.0 : geo::point_ring_distance(rois[i].envelope, probe);
      if (d < best) {
        best = d;
        roi_index = static_cast<int>(i);
      }
    }
    json entry_json{{"roi", roi_index}, {"area", geo::polygon_area(region)}};
    try {
      const auto plan = coverage::plan_region(region, cc, entry);
      entry_json["plan"] = coverage::region_plan_to_json(plan);
    } catch (const Error& e) {
      entry_json["region"] = geo::polygon_to_json(region);
      entry_json["error"] = error_json(e);
    }
    out.push_back(entry_json);
  }
  return dump({{"requested_sweep_dir_deg", sweep}, {"regions", out}}, ctx.config_hash);
}

namespace {

struct PlannedRegion {
  int index = 0;
  int roi = -1;
  coverage::RegionPlan plan;
};

std::vector<PlannedRegion> load_region_plans(const StageContext& ctx) {
  const json cov = parse(ctx.artifact(Stage::CoveragePlanned));
  std::vector<PlannedRegion> out;
  int i = 0;
  for (const auto& r : cov.at("regions")) {
    if (r.contains("plan")) out.push_back({i, r.at("roi").get<int>(), coverage::region_plan_from_json(r.at("plan"))});
    ++i;
  }
  return out;
}

std::vector<geo::Point2> load_unload_points(const StageContext& ctx) {
  std::vector<geo::Point2> pts;
  if (auto u = ctx.input(kUnloadPoints))
    for (const auto& p : u->at("points")) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return pts;
}

}  // namespace

std::string produce_routes(const StageContext& ctx) {
  const auto candidates = load_unload_points(ctx);
  if (candidates.empty()) fail(ErrorCode::Sequencing, "no unloading point candidates");
  const auto fused = load_fused(ctx);
  const auto planned = load_region_plans(ctx);
  const geo::BinaryGrid grid = route::inflate(trav::obstacle_layer(fused), ctx.config.ground.inflation);
  const auto& g = grid.geometry;

  // Keep the regions and candidates sharing the free component that holds
  // the most regions (ties to the lowest candidate index).
  gridding::Mask free_mask(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) free_mask[i] = grid.occupied[i] ? 0 : 1;
  const auto comps = gridding::label_components(g, free_mask, gridding::Connectivity::Eight);
  auto component_of = [&](geo::Point2 p) {
    const auto c = route::nearest_free_cell(grid, p);
    return comps.label[g.index(c.row, c.col)];
  };
  std::vector<int> cand_comp;
  for (const auto& p : candidates) cand_comp.push_back(component_of(p));
  std::vector<std::pair<int, int>> region_comp;  // entry, exit components
  for (const auto& pr : planned)
    region_comp.push_back({component_of(pr.plan.plan.waypoints.waypoints.front().xy()),
                           component_of(pr.plan.plan.waypoints.waypoints.back().xy())});
  int best_comp = -1;
  int best_count = -1;
  for (int c : cand_comp) {
    int n = 0;
    for (const auto& [a, b] : region_comp) n += (a == c && b == c) ? 1 : 0;
    if (n > best_count) {
      best_count = n;
      best_comp = c;
    }
  }
  std::vector<geo::Point2> used_candidates;
  std::vector<int> used_candidate_index;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (cand_comp[i] == best_comp) {
      used_candidates.push_back(candidates[i]);
      used_candidate_index.push_back(static_cast<int>(i));
    }
  std::vector<route::Endpoints> endpoints;
  std::vector<const PlannedRegion*> used;
  json dropped = json::array();
  for (std::size_t i = 0; i < planned.size(); ++i) {
    if (region_comp[i].first == best_comp && region_comp[i].second == best_comp) {
      const auto& w = planned[i].plan.plan.waypoints.waypoints;
      endpoints.push_back({w.front().xy(), w.back().xy()});
      used.push_back(&planned[i]);
    } else {
      dropped.push_back({{"region", planned[i].index}, {"reason", "unreachable from the unloading points"}});
    }
  }
  if (used.size() > 7) fail(ErrorCode::Config, "too many regions for exhaustive route planning");
  route::RouteOptions opts;
  opts.allow_reverse = ctx.config.ground.allow_reverse;
  const route::RoutePlan plan = route::plan_routes(grid, used_candidates, endpoints, opts);

  // Full ground mission: legs interleaved with the (possibly reversed) region plans.
  geo::Trajectory traj;
  traj.speed = ctx.config.ground.speed;
  traj.sampling_period = ctx.config.ground.sampling_period;
  json kinds = json::array();
  auto append = [&](const std::vector<geo::Point2>& pts, const std::vector<std::string>& seg_kinds) {
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const geo::Point3 p{pts[k].x, pts[k].y, 0.0};
      if (!traj.waypoints.empty() && k == 0) {
        if (traj.waypoints.back() == p) continue;
        kinds.push_back("transit");
      }
      if (k > 0) kinds.push_back(seg_kinds[k - 1]);
      traj.waypoints.push_back(p);
    }
  };
  json order = json::array();
  for (std::size_t li = 0; li < plan.legs.size(); ++li) {
    append(plan.legs[li].polyline, std::vector<std::string>(plan.legs[li].polyline.size(), "transit"));
    if (li < plan.roi_order.size()) {
      const int r = plan.roi_order[li];
      const bool rev = plan.reversed[static_cast<std::size_t>(r)];
      const coverage::CoveragePlan cp = rev ? coverage::reversed(used[static_cast<std::size_t>(r)]->plan.plan)
                                            : used[static_cast<std::size_t>(r)]->plan.plan;
      std::vector<geo::Point2> pts;
      for (const auto& w : cp.waypoints.waypoints) pts.push_back(w.xy());
      std::vector<std::string> sk;
      for (auto k : cp.segment_kinds) sk.push_back(coverage::to_string(k));
      append(pts, sk);
      order.push_back({{"region", used[static_cast<std::size_t>(r)]->index}, {"reversed", rev}});
    }
  }
  json plan_json = route::route_plan_to_json(plan);
  plan_json["chosen_unload"] = plan.chosen_unload >= 0 ? used_candidate_index[static_cast<std::size_t>(plan.chosen_unload)] : -1;
  return dump({{"unload_candidates", geo::ring_to_json(candidates)},
               {"plan", plan_json},
               {"visit_order", order},
               {"dropped_regions", dropped},
               {"trajectory", geo::trajectory_to_json(traj)},
               {"segment_kinds", kinds},
               {"trajectory_length", traj.length_2d()}},
              ctx.config_hash);
}

std::string produce_ground_survey(const StageContext& ctx) {
  const geo::Dem dem = load_terrain(ctx);
  const geo::Trajectory traj = geo::trajectory_from_json(parse(ctx.artifact(Stage::RoutesPlanned)).at("trajectory"));
  sim::SurveyOptions opts;
  opts.mode = sim::HeightMode::Ground;
  opts.ground_height = ctx.config.ground.detector_height;
  opts.seed = ctx.config.seed + 1;
  return csv_with_hash(sim::simulate_survey(ctx.scenario.field, dem, traj, opts), ctx.config_hash);
}

namespace {

struct Fit {
  json record;
  loc::ParameterMatrix theta;
  std::vector<int> roi_of;  // per estimate
};

Fit localize_roi(const std::vector<sim::Measurement>& sub, int roi, const LocalizationConfig& lc) {
  Fit f;
  f.record = {{"roi", roi}, {"samples", sub.size()}};
  if (sub.size() < 3) {
    f.record["note"] = "too few measurements inside the ROI";
    return f;
  }
  try {
    const geo::GridMap grid = gridding::interpolate_grid(sub, lc.grid_cell);
    const auto peaks = loc::count_peaks(grid, sub, lc.min_samples, lc.basis);
    f.record["thresholds"] = gridding::thresholds_to_json(peaks.thresholds);
    f.record["peak_count"] = peaks.count;
    f.record["contours"] = rings_json(peaks.contours);
    if (peaks.count == 0) return f;
    const double h = mean_height(sub);
    const auto theta0 = loc::init_parameters(peaks.contours, peaks.peak_values, peaks.thresholds.mu_bg, h);
    f.record["init"] = loc::estimates_to_json(theta0);
    loc::GaussNewtonOptions opts;
    opts.tol = lc.tol;
    opts.max_iter = lc.max_iter;
    opts.background = lc.fit_background ? 0.0 : peaks.thresholds.mu_bg;
    opts.fit_background = lc.fit_background;
    const auto refined = loc::refine_intensities(theta0, sub, h, opts);
    f.record["refined"] = loc::estimates_to_json(refined);
    const auto rep = loc::gauss_newton_multistart(refined, sub, h, opts, lc.restart_offset);
    f.record["height"] = h;
    f.record["report"] = loc::report_to_json(rep);
    f.theta = rep.theta;
    f.roi_of.assign(rep.theta.size(), roi);
  } catch (const Error& e) {
    f.record["error"] = error_json(e);
  }
  return f;
}

json peaks_summary(const std::vector<sim::Measurement>& sub, const std::vector<double>& values,
                   const std::vector<double>& sigma, const LocalizationConfig& lc) {
  std::vector<sim::Measurement> ms = sub;
  for (std::size_t i = 0; i < ms.size(); ++i) ms[i].counts = values[i];
  const geo::GridMap grid = gridding::interpolate_grid(ms, lc.grid_cell);
  const auto peaks = loc::count_peaks(grid, ms, lc.min_samples, lc.basis);
  // Net window counts scatter around zero where the isotope is absent, so a
  // contour also needs min_samples samples above 3 sigma of counting noise.
  json contours = json::array();
  for (const auto& ring : peaks.contours) {
    int significant = 0;
    for (std::size_t i = 0; i < ms.size(); ++i)
      if (values[i] > 3.0 * sigma[i] && geo::point_in_ring(ring, {ms[i].x, ms[i].y})) ++significant;
    if (significant >= lc.min_samples) contours.push_back(geo::ring_to_json(ring));
  }
  return {{"peak_count", contours.size()}, {"contours", contours}, {"threshold_contours", peaks.count},
          {"thresholds", gridding::thresholds_to_json(peaks.thresholds)}};
}

}  // namespace

std::string produce_localization(const StageContext& ctx) {
  const auto& lc = ctx.config.localization;
  const auto ground = sim::measurements_from_csv(ctx.artifact(Stage::GroundSurveyed));
  const auto rois = load_rois(ctx);
  const auto fused = load_fused(ctx);
  const auto planned = load_region_plans(ctx);
  const auto& truth = ctx.scenario.field.sources;

  json per_roi = json::array();
  loc::ParameterMatrix ground_theta;
  std::vector<int> ground_roi;
  std::vector<std::vector<sim::Measurement>> subs;
  for (std::size_t i = 0; i < rois.size(); ++i) {
    subs.push_back(inside(ground, rois[i]));
    Fit f = localize_roi(subs.back(), static_cast<int>(i), lc);
    per_roi.push_back(f.record);
    ground_theta.insert(ground_theta.end(), f.theta.begin(), f.theta.end());
    ground_roi.insert(ground_roi.end(), f.roi_of.begin(), f.roi_of.end());
  }

  // Aerial localization from the ROI-stage hotspots for comparison.
  json aerial_json;
  loc::ParameterMatrix aerial_theta;
  {
    const json roi_art = parse(ctx.artifact(Stage::RoisDetected));
    const auto hotspots = gridding::hotspots_from_json(roi_art.at("hotspots"));
    const double mu_bg = roi_art.at("thresholds").at("mu_bg").get<double>();
    const auto raw = sim::measurements_from_csv(ctx.artifact(Stage::AerialSurveyed));
    const auto down = gridding::downsample_by_summing(raw, ctx.config.roi.downsample);
    aerial_json = {{"samples", down.size()}};
    if (!hotspots.empty()) {
      try {
        std::vector<geo::Ring> contours;
        std::vector<double> peaks;
        for (const auto& h : hotspots) {
          contours.push_back(h.contour);
          peaks.push_back(h.peak_value);
        }
        const double h = mean_height(down);
        const auto theta0 = loc::init_parameters(contours, peaks, mu_bg, h);
        loc::GaussNewtonOptions opts;
        opts.tol = lc.tol;
        opts.max_iter = lc.max_iter;
        opts.background = mu_bg;
        const auto refined = loc::refine_intensities(theta0, down, h, opts);
        const auto rep = loc::gauss_newton_multistart(refined, down, h, opts, lc.restart_offset);
        aerial_json["height"] = h;
        aerial_json["init"] = loc::estimates_to_json(theta0);
        aerial_json["report"] = loc::report_to_json(rep);
        aerial_theta = rep.theta;
      } catch (const Error& e) {
        aerial_json["error"] = error_json(e);
      }
    }
  }

  // Miss annotations follow the ground-mapping pipeline.
  auto inside_any_roi = [&](const sim::RadSource& s) {
    return std::any_of(rois.begin(), rois.end(), [&](const auto& r) { return geo::point_in_region(r, s.x, s.y); });
  };
  auto accessible = [&](const sim::RadSource& s) {
    const auto cell = fused.grid.geometry.cell_of(s.x, s.y);
    if (cell && (fused.provenance[fused.grid.geometry.index(cell->row, cell->col)] & (trav::kTerrain | trav::kManual)))
      return false;
    return std::any_of(planned.begin(), planned.end(),
                       [&](const auto& p) { return geo::point_in_region(p.plan.region, s.x, s.y); });
  };
  // A source inside another source's peak contour was merged into it.
  std::vector<geo::Ring> peak_contours;
  for (const auto& r : per_roi)
    if (r.contains("contours"))
      for (const auto& c : r.at("contours")) peak_contours.push_back(geo::ring_from_json(c));
  auto reason = [&](int t) -> std::string {
    const auto& s = truth[static_cast<std::size_t>(t)];
    if (!inside_any_roi(s)) return "Outside the ROI";
    if (!accessible(s)) return "Inaccessible to the UGV";
    for (const auto& c : peak_contours)
      if (geo::point_in_ring(c, {s.x, s.y})) return "Overshadowed";
    return "Not resolved";
  };
  const auto ground_score = loc::score(ground_theta, truth, lc.max_match, reason);
  const auto aerial_score = loc::score(aerial_theta, truth, lc.aerial_max_match);

  // Two-window isotope separation: window background from the transit
  // samples outside every ROI, stripping from the configured reference ROI.
  json spectral = {{"available", false}};
  const bool windows = !ground.empty() && std::all_of(ground.begin(), ground.end(), [](const auto& m) { return m.windows.has_value(); });
  if (windows) {
    std::vector<sim::Measurement> outside;
    for (const auto& m : ground)
      if (std::none_of(rois.begin(), rois.end(), [&](const auto& r) { return geo::point_in_region(r, m.x, m.y); }))
        outside.push_back(m);
    if (outside.size() >= 10) {
      loc::WindowBackground bg;
      for (const auto& m : outside) {
        bg.cs += m.windows->cs;
        bg.co += m.windows->co;
      }
      bg.cs /= static_cast<double>(outside.size());
      bg.co /= static_cast<double>(outside.size());
      spectral = {{"available", true}, {"background", {{"cs", bg.cs}, {"co", bg.co}}}, {"background_samples", outside.size()}};
      const int ref = lc.stripping_reference_roi;
      if (ref >= 0 && ref < static_cast<int>(rois.size())) {
        try {
          const double k = loc::estimate_stripping(subs[static_cast<std::size_t>(ref)], bg);
          spectral["stripping_coefficient"] = k;
          json maps = json::array();
          for (std::size_t i = 0; i < rois.size(); ++i) {
            if (subs[i].size() < 3) continue;
            const auto net = loc::separate_isotopes(subs[i], k, bg);
            // Poisson variance of each net value: the window counts it came from.
            std::vector<double> cs, co, cs_sigma, co_sigma;
            for (std::size_t m = 0; m < net.size(); ++m) {
              const auto& w = *subs[i][m].windows;
              cs.push_back(net[m].cs);
              co.push_back(net[m].co);
              cs_sigma.push_back(std::sqrt(w.cs + k * k * w.co + bg.cs));
              co_sigma.push_back(std::sqrt(w.co + bg.co));
            }
            maps.push_back({{"roi", i},
                            {"cs_net", peaks_summary(subs[i], cs, cs_sigma, lc)},
                            {"co_net", peaks_summary(subs[i], co, co_sigma, lc)}});
          }
          spectral["isotope_maps"] = maps;
        } catch (const Error& e) {
          spectral["error"] = error_json(e);
        }
      }
    }
  }

  json truth_json = json::array();
  for (const auto& s : truth) truth_json.push_back(sim::source_to_json(s));
  return dump({{"rois", per_roi},
               {"estimates", loc::estimates_to_json(ground_theta)},
               {"estimate_roi", ground_roi},
               {"score", loc::score_to_json(ground_score, truth)},
               {"aerial", aerial_json},
               {"aerial_estimates", loc::estimates_to_json(aerial_theta)},
               {"aerial_score", loc::score_to_json(aerial_score, truth)},
               {"spectral", spectral},
               {"truth", truth_json}},
              ctx.config_hash);
}

}  // namespace radsurvey::mission::detail

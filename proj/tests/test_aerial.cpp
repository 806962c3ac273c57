#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "radsurvey/aerial/planner.hpp"
#include "radsurvey/error.hpp"
#include "radsurvey/geo/geometry.hpp"
#include "support.hpp"

using namespace radsurvey;
using namespace radsurvey::aerial;

TEST(WorstCaseDistance, Anchors) {
  EXPECT_NEAR(worst_case_distance(10, 15), 15.811, 1e-3);
  EXPECT_NEAR(worst_case_distance(10, 15) / 15.0 - 1.0, 0.054, 1e-3);
  EXPECT_DOUBLE_EQ(worst_case_distance(0, 15), 15.0);
  EXPECT_NEAR(worst_case_distance(30, 15), 15.0 * std::numbers::sqrt2, 1e-12);
  EXPECT_THROW(worst_case_distance(10, 0), Error);
}

namespace {

StripPlanConfig rect_plan(double w, double h, double spacing) {
  StripPlanConfig cfg;
  cfg.area.envelope = fixture::rect(0, 0, w, h);
  cfg.strip_spacing = spacing;
  return cfg;
}

}  // namespace

TEST(PlanStrips, SiteRectangleGivesFourteenStrips) {
  const auto t = plan_strips(rect_plan(140, 135, 10));
  ASSERT_EQ(t.waypoints.size(), 28u);
  for (std::size_t k = 0; k < 14; ++k) {
    const auto& a = t.waypoints[2 * k];
    const auto& b = t.waypoints[2 * k + 1];
    EXPECT_NEAR(geo::distance(a.xy(), b.xy()), 140.0, 1e-9);
    EXPECT_NEAR(a.y, 5.0 + 10.0 * k, 1e-9);
    // Serpentine: consecutive strips run in opposite directions.
    EXPECT_EQ(b.x > a.x, k % 2 == 0);
  }
}

TEST(PlanStrips, NarrowAreaGivesOneCenteredStrip) {
  const auto t = plan_strips(rect_plan(50, 6, 10));
  ASSERT_EQ(t.waypoints.size(), 2u);
  EXPECT_DOUBLE_EQ(t.waypoints[0].y, 3.0);
}

TEST(PlanStrips, StripCountFormula) {
  for (double w : {10.0, 19.9, 20.0, 47.0, 135.0}) {
    const auto t = plan_strips(rect_plan(30, w, 10));
    EXPECT_EQ(t.waypoints.size() / 2, static_cast<std::size_t>(std::floor(w / 10.0)) + 1) << w;
  }
}

TEST(PlanStrips, HeadingRotatesStrips) {
  auto cfg = rect_plan(60, 60, 10);
  cfg.heading = std::numbers::pi / 2;
  const auto t = plan_strips(cfg);
  EXPECT_EQ(t.waypoints.size(), 14u);
  for (std::size_t k = 0; k + 1 < t.waypoints.size(); k += 2)
    EXPECT_NEAR(t.waypoints[k].x, t.waypoints[k + 1].x, 1e-9);
}

TEST(PlanStrips, CoversTheArea) {
  const auto cfg = rect_plan(73, 58, 10);
  const auto t = plan_strips(cfg);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ux(0, 73), uy(0, 58);
  for (int i = 0; i < 500; ++i) {
    const geo::Point2 p{ux(rng), uy(rng)};
    double best = 1e9;
    for (std::size_t k = 0; k + 1 < t.waypoints.size(); k += 2)
      best = std::min(best, geo::point_segment_distance(p, t.waypoints[k].xy(), t.waypoints[k + 1].xy()));
    // A/2 between lines plus the A/2 inset against an edge that is not a multiple of A.
    EXPECT_LE(best, 10.0) << p.x << "," << p.y;
  }
}

TEST(TerrainFollowing, SegmentationArithmetic) {
  const auto dem = fixture::flat_dem(-1, -1, 1, 10, 110);
  geo::Trajectory t;
  t.waypoints = {{0, 0, 0}, {100, 0, 0}};
  TerrainFollowConfig cfg;
  cfg.segment_size = 10;
  const auto out = adjust_terrain_following(t, dem, cfg);
  EXPECT_EQ(out.waypoints.size(), 11u);
  for (const auto& w : out.waypoints) EXPECT_DOUBLE_EQ(w.z, 15.0);
}

TEST(TerrainFollowing, SpacingBoundAndLengthPreserved) {
  const auto dem = fixture::flat_dem(-5, -5, 1, 160, 160);
  const auto t = plan_strips(rect_plan(140, 135, 10));
  TerrainFollowConfig cfg;
  cfg.segment_size = 7.3;
  const auto out = adjust_terrain_following(t, dem, cfg);
  for (std::size_t i = 1; i < out.waypoints.size(); ++i)
    EXPECT_LE(geo::distance(out.waypoints[i - 1].xy(), out.waypoints[i].xy()), 7.3 + 1e-9);
  EXPECT_NEAR(out.length_2d(), t.length_2d(), 1e-6 * t.length_2d());
  // Corner waypoints survive as positions.
  std::size_t found = 0;
  for (const auto& c : t.waypoints)
    for (const auto& w : out.waypoints)
      if (geo::distance(c.xy(), w.xy()) < 1e-9) {
        ++found;
        break;
      }
  EXPECT_EQ(found, t.waypoints.size());
}

TEST(TerrainFollowing, UnfilteredFollowingIsExactOnRamp) {
  const auto dem = fixture::make_dem(0, 0, 0.5, 80, 80, [](double x, double y) { return 0.3 * x + 0.1 * y; });
  geo::Trajectory t;
  t.waypoints = {{0.25, 0.25, 0}, {39.75, 0.25, 0}, {39.75, 20.25, 0}, {0.25, 20.25, 0}};
  TerrainFollowConfig cfg;
  cfg.filter_window = 1;
  cfg.segment_size = 0.5;
  const auto out = adjust_terrain_following(t, dem, cfg);
  const auto prof = agl_profile(out, dem, 15.0);
  for (const auto& s : prof.samples) EXPECT_NEAR(s.agl, 15.0, 1e-9);
  EXPECT_NEAR(prof.rms_deviation, 0.0, 1e-9);
}

TEST(TerrainFollowing, FilteredStepDeviationBoundedByStep) {
  const double step = 3.0;
  const auto dem = fixture::make_dem(0, 0, 0.5, 40, 200, [&](double x, double) { return x > 50 ? step : 0.0; });
  geo::Trajectory t;
  t.waypoints = {{1, 10, 0}, {99, 10, 0}};
  TerrainFollowConfig cfg;
  cfg.segment_size = 2.0;
  const auto out = adjust_terrain_following(t, dem, cfg);
  // Oracle: evaluate AGL directly from the analytic terrain.
  double worst = 0.0;
  for (const auto& w : out.waypoints) worst = std::max(worst, std::abs(w.z - (w.x > 50 ? step : 0.0) - 15.0));
  EXPECT_GT(worst, 0.0);
  EXPECT_LE(worst, step + 1e-9);
  EXPECT_LE(agl_profile(out, dem, 15.0, 0.5).max_abs_deviation, step + 1e-9);
}

TEST(TerrainFollowing, MovingAveragePreservesInteriorMean) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> n(-1.0, 1.0);
  std::vector<double> h(200 * 200);
  for (auto& v : h) v = n(rng);
  geo::Dem dem(geo::GridGeometry{0, 0, 1, 200, 200}, h);
  geo::Trajectory t;
  t.waypoints = {{0.5, 100.5, 0}, {199.5, 100.5, 0}};
  TerrainFollowConfig raw_cfg;
  raw_cfg.filter_window = 1;
  raw_cfg.segment_size = 1.0;
  raw_cfg.nearest_sampling = true;
  TerrainFollowConfig cfg = raw_cfg;
  cfg.filter_window = 5;
  const auto a = adjust_terrain_following(t, dem, raw_cfg);
  const auto b = adjust_terrain_following(t, dem, cfg);
  ASSERT_EQ(a.waypoints.size(), b.waypoints.size());
  double sa = 0, sb = 0;
  for (std::size_t i = 0; i < a.waypoints.size(); ++i) {
    sa += a.waypoints[i].z;
    sb += b.waypoints[i].z;
  }
  // Only the shrunk end windows can move the mean: at most two waypoints' worth per end.
  const double n_w = static_cast<double>(a.waypoints.size());
  EXPECT_LE(std::abs(sa - sb) / n_w, 4.0 * 2.0 / n_w);
  // Endpoints are unfiltered.
  EXPECT_DOUBLE_EQ(a.waypoints.front().z, b.waypoints.front().z);
  EXPECT_DOUBLE_EQ(a.waypoints.back().z, b.waypoints.back().z);
}

TEST(TerrainFollowing, RejectsBadConfigAndExtent) {
  const auto dem = fixture::flat_dem(0, 0, 1, 10, 10);
  geo::Trajectory t;
  t.waypoints = {{1, 1, 0}, {5, 1, 0}};
  TerrainFollowConfig cfg;
  cfg.filter_window = 4;
  EXPECT_THROW(adjust_terrain_following(t, dem, cfg), Error);
  cfg.filter_window = 3;
  t.waypoints.back().x = 15;
  try {
    adjust_terrain_following(t, dem, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Extent);
  }
}

TEST(AglProfile, FlatConstantHeight) {
  const auto dem = fixture::flat_dem(0, 0, 1, 10, 10);
  geo::Trajectory t;
  t.waypoints = {{1, 1, 15}, {9, 9, 15}};
  const auto p = agl_profile(t, dem, 15.0, 1.0);
  EXPECT_GT(p.samples.size(), 2u);
  for (const auto& s : p.samples) EXPECT_DOUBLE_EQ(s.agl, 15.0);
  EXPECT_DOUBLE_EQ(p.rms_deviation, 0.0);
  EXPECT_NEAR(p.samples.back().arc_length, 8 * std::numbers::sqrt2, 1e-12);
}

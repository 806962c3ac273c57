#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "radsurvey/error.hpp"
#include "radsurvey/geo/io.hpp"
#include "radsurvey/sim/field.hpp"
#include "radsurvey/sim/io.hpp"
#include "radsurvey/sim/terrain.hpp"
#include "support.hpp"

using namespace radsurvey;
using namespace radsurvey::sim;

TEST(ExpectedIntensity, BackgroundOnly) {
  RadiationField f;
  f.background_rate = 100.0;
  EXPECT_DOUBLE_EQ(expected_intensity(f, 3.0, -7.0, 1.0), 100.0);
}

TEST(ExpectedIntensity, DirectlyAboveSource) {
  RadiationField f;
  f.background_rate = 30.0;
  f.sources.push_back(fixture::point_source(900.0, 2.0, 2.0));
  EXPECT_DOUBLE_EQ(expected_intensity(f, 2.0, 2.0, 3.0), 130.0);
}

TEST(ExpectedIntensity, MidStripRatio) {
  RadiationField f;
  f.background_rate = 0.0;
  f.sources.push_back(fixture::point_source(1.0, 0.0, 0.0));
  const double ratio = expected_intensity(f, 5.0, 0.0, 15.0) / expected_intensity(f, 0.0, 0.0, 15.0);
  EXPECT_NEAR(ratio, 225.0 / 250.0, 1e-12);
}

TEST(ExpectedIntensity, RejectsNonPositiveHeight) {
  RadiationField f;
  try {
    expected_intensity(f, 0, 0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Domain);
  }
}

TEST(ExpectedIntensity, InverseSquareInvariant) {
  RadiationField f;
  f.background_rate = 12.0;
  f.sources.push_back(fixture::point_source(777.0, 1.0, -2.0));
  const double h = 0.7;
  double ref = -1.0;
  for (double dx : {0.0, 0.3, 2.0, 11.0})
    for (double dy : {0.0, -4.0, 9.5}) {
      const double d2 = dx * dx + dy * dy + h * h;
      const double v = (expected_intensity(f, 1.0 + dx, -2.0 + dy, h) - f.background_rate) * d2;
      if (ref < 0) ref = v;
      EXPECT_NEAR(v, ref, 1e-9);
    }
}

TEST(ExpectedIntensity, ReflectionSymmetry) {
  // Reflect detector and sources through the line y = x.
  RadiationField f, g;
  f.sources = {fixture::point_source(500, 3, 1), fixture::point_source(200, -2, 4)};
  g.sources = {fixture::point_source(500, 1, 3), fixture::point_source(200, 4, -2)};
  for (double x : {-3.0, 0.5, 6.0})
    for (double y : {-1.0, 2.0})
      EXPECT_NEAR(expected_intensity(f, x, y, 1.2), expected_intensity(g, y, x, 1.2), 1e-12);
}

TEST(Calibration, LinearAndRoundTrip) {
  Calibration cal;
  EXPECT_DOUBLE_EQ(emission_from_activity(Isotope::Cs137, 7.53, cal), 100.0 * 7.53);
  EXPECT_DOUBLE_EQ(emission_from_activity(Isotope::Co60, 0.01, cal), 1.0);
  EXPECT_THROW(emission_from_activity(Isotope::Co60, 0.0, cal), Error);
  for (double x : {0.0, 0.07, 0.207, 5.0}) EXPECT_NEAR(dose_from_counts(counts_from_dose(x, cal), cal), x, 1e-15);
  // Default background of 30 counts/s reads as 0.07 uGy/h.
  EXPECT_NEAR(dose_from_counts(RadiationField{}.background_rate, cal), 0.07, 1e-12);
  EXPECT_THROW(dose_from_counts(-1.0, cal), Error);
}

TEST(Poisson, SequenceIsReproducible) {
  PoissonSampler a(42), b(42);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(a.poisson(3.7 + i % 50), b.poisson(3.7 + i % 50));
}

TEST(Poisson, MeanAndVarianceMatchTheory) {
  for (double mean : {0.5, 7.0, 130.0, 2.5e4}) {
    PoissonSampler rng(11);
    const int n = 10000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double v = static_cast<double>(rng.poisson(mean));
      s += v;
      s2 += v * v;
    }
    const double m = s / n;
    const double var = s2 / n - m * m;
    EXPECT_NEAR(m / mean, 1.0, 3.0 / std::sqrt(n * mean)) << mean;
    EXPECT_NEAR(var / mean, 1.0, 0.1) << mean;
  }
  PoissonSampler rng(1);
  EXPECT_EQ(rng.poisson(0.0), 0u);
  EXPECT_THROW(rng.poisson(-1.0), Error);
}

namespace {

geo::Trajectory line(double x0, double y0, double x1, double y1, double z = 0.0) {
  geo::Trajectory t;
  t.waypoints = {{x0, y0, z}, {x1, y1, z}};
  return t;
}

}  // namespace

TEST(SimulateSurvey, ZeroFieldGivesZeroCounts) {
  RadiationField f;
  f.background_rate = 0.0;
  f.spectral.background_cs = f.spectral.background_co = 0.0;
  const auto dem = fixture::flat_dem(0, 0, 1, 20, 20);
  const auto ms = simulate_survey(f, dem, line(1, 1, 19, 19), {});
  ASSERT_FALSE(ms.empty());
  for (const auto& m : ms) {
    EXPECT_EQ(m.counts, 0.0);
    EXPECT_EQ(m.windows->cs, 0.0);
  }
}

TEST(SimulateSurvey, OneSamplePerPeriodAtMidWindow) {
  RadiationField f;
  const auto dem = fixture::flat_dem(0, 0, 1, 20, 20);
  auto t = line(0, 5, 10, 5);
  t.speed = 2.0;
  t.sampling_period = 0.5;
  const auto ms = simulate_survey(f, dem, t, {});
  ASSERT_EQ(ms.size(), 10u);
  EXPECT_DOUBLE_EQ(ms[0].x, 0.5);
  EXPECT_DOUBLE_EQ(ms[0].t, 0.25);
  EXPECT_DOUBLE_EQ(ms[9].x, 9.5);
  EXPECT_DOUBLE_EQ(ms[0].z_agl, 0.5);
}

TEST(SimulateSurvey, AerialHeightIsAboveTerrain) {
  RadiationField f;
  auto dem = fixture::make_dem(0, 0, 1, 20, 20, [](double x, double) { return 0.2 * x; });
  SurveyOptions o;
  o.mode = HeightMode::Aerial;
  const auto ms = simulate_survey(f, dem, line(2, 10, 18, 10, 20.0), o);
  for (const auto& m : ms) EXPECT_NEAR(m.z_agl, 20.0 - 0.2 * m.x, 1e-9);
  EXPECT_THROW(simulate_survey(f, dem, line(2, 10, 18, 10, 2.0), o), Error);
}

TEST(SimulateSurvey, SeedDeterminesOutput) {
  RadiationField f;
  f.sources.push_back(fixture::point_source(2000, 10, 10));
  const auto dem = fixture::flat_dem(0, 0, 1, 20, 20);
  SurveyOptions o;
  o.seed = 9;
  const auto a = simulate_survey(f, dem, line(0, 0, 20, 20), o);
  const auto b = simulate_survey(f, dem, line(0, 0, 20, 20), o);
  EXPECT_EQ(measurements_to_csv(a), measurements_to_csv(b));
  o.seed = 10;
  EXPECT_NE(measurements_to_csv(a), measurements_to_csv(simulate_survey(f, dem, line(0, 0, 20, 20), o)));
}

TEST(SimulateSurvey, TotalCountsWithinFourSigma) {
  RadiationField f;
  f.sources.push_back(fixture::point_source(5000, 25, 25));
  const auto dem = fixture::flat_dem(0, 0, 1, 50, 50);
  geo::Trajectory t;
  for (int i = 0; i < 10; ++i) {
    t.waypoints.push_back({1.0, 2.0 + 5.0 * i, 0.0});
    t.waypoints.push_back({49.0, 2.0 + 5.0 * i, 0.0});
  }
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SurveyOptions o;
    o.seed = seed;
    const auto ms = simulate_survey(f, dem, t, o);
    double total = 0.0, lambda = 0.0;
    for (const auto& m : ms) {
      total += m.counts;
      lambda += expected_intensity(f, m.x, m.y, m.z_agl) * t.sampling_period;
    }
    EXPECT_LT(std::abs(total - lambda), 4.0 * std::sqrt(lambda));
  }
}

TEST(SimulateSurvey, LeavingDemIsExtentError) {
  RadiationField f;
  const auto dem = fixture::flat_dem(0, 0, 1, 10, 10);
  try {
    simulate_survey(f, dem, line(1, 1, 12, 1), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Extent);
  }
}

TEST(SimulateSurvey, WindowsFollowSpectralModel) {
  RadiationField f;
  f.sources.push_back(fixture::point_source(1e5, 5, 5, Isotope::Co60));
  const auto w = expected_window_rates(f, 5, 5, 1.0);
  EXPECT_NEAR(w.co, 1.5 + 0.15 * 1e5, 1e-9);
  EXPECT_NEAR(w.cs, 3.0 + 0.30 * 0.15 * 1e5, 1e-9);
}

TEST(Terrain, FlatAndRamp) {
  TerrainSpec flat;
  flat.width = 10;
  flat.height = 8;
  flat.cell_size = 0.5;
  flat.base_height = 2.0;
  const auto dem = synth_terrain(flat);
  EXPECT_EQ(dem.geometry().cols, 20);
  EXPECT_EQ(dem.geometry().rows, 16);
  for (double h : dem.heights()) EXPECT_EQ(h, 2.0);

  TerrainSpec ramp;
  ramp.width = 40;
  ramp.height = 4;
  ramp.cell_size = 0.25;
  RampFeature r;
  r.start = 10;
  r.length = 20;
  r.slope_deg = 10;
  ramp.features.push_back(r);
  const auto rd = synth_terrain(ramp);
  const auto [lo, hi] = std::minmax_element(rd.heights().begin(), rd.heights().end());
  EXPECT_NEAR(*hi - *lo, 20.0 * std::tan(10.0 * std::numbers::pi / 180.0), 1e-12);
}

TEST(Terrain, SeededNoiseIsReproducible) {
  TerrainSpec s;
  s.noise_amplitude = 0.3;
  s.seed = 5;
  EXPECT_EQ(synth_terrain(s).heights(), synth_terrain(s).heights());
  TerrainSpec t = s;
  t.seed = 6;
  EXPECT_NE(synth_terrain(s).heights(), synth_terrain(t).heights());
  s.cell_size = 0;
  EXPECT_THROW(synth_terrain(s), Error);
}

TEST(Terrain, SpecJsonRoundTrip) {
  TerrainSpec s;
  s.features.push_back(HillFeature{1, 2, 3, 4});
  s.features.push_back(BlockFeature{0, 0, 1, 1, 0.2});
  s.features.push_back(RampFeature{});
  const auto j = terrain_spec_to_json(s);
  EXPECT_EQ(terrain_spec_to_json(terrain_spec_from_json(j)), j);
  EXPECT_EQ(synth_terrain(terrain_spec_from_json(j)).heights(), synth_terrain(s).heights());
}

TEST(MeasurementCsv, RoundTripAndCommentLines) {
  std::vector<Measurement> ms(2);
  ms[0] = {0.5, 1.25, 2.5, 15.0, 33, 0.077, WindowCounts{4, 2}};
  ms[1] = {1.5, 3.0, 2.5, 14.5, 40, 0.093, WindowCounts{6, 1}};
  const std::string csv = measurements_to_csv(ms);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x,y,z_agl,counts,dose_rate,w_cs,w_co");
  const auto back = measurements_from_csv("# config_hash=abc\n" + csv);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].counts, 40.0);
  EXPECT_EQ(back[1].windows->cs, 6.0);
  EXPECT_EQ(measurements_to_csv(back), csv);

  ms[1].windows.reset();
  const std::string no_windows = measurements_to_csv(ms);
  EXPECT_EQ(no_windows.substr(0, no_windows.find('\n')), "t,x,y,z_agl,counts,dose_rate");
}

TEST(Scenario, BundledPresetParses) {
  const auto j = geo::read_json_file(std::string(RADSURVEY_SOURCE_DIR) + "/tools/scenarios/field_site.json");
  const Scenario s = scenario_from_json(j);
  EXPECT_EQ(s.field.sources.size(), 8u);
  double co = 0, cs = 0;
  for (const auto& src : s.field.sources) (src.isotope == Isotope::Co60 ? co : cs) += src.activity_mbq;
  EXPECT_GT(co, 0.0);
  EXPECT_GT(cs, 0.0);
  const Scenario again = scenario_from_json(scenario_to_json(s));
  EXPECT_EQ(scenario_to_json(again), scenario_to_json(s));
}

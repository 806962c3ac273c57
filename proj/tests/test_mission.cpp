#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "radsurvey/error.hpp"
#include "radsurvey/geo/geometry.hpp"
#include "radsurvey/geo/io.hpp"
#include "radsurvey/mission/config.hpp"
#include "radsurvey/mission/mission.hpp"
#include "radsurvey/trav/traversability.hpp"
#include "support.hpp"

using namespace radsurvey;
using namespace radsurvey::mission;
namespace fs = std::filesystem;

namespace {

nlohmann::json bundled_scenario() {
  std::ifstream in(fs::path(RADSURVEY_SOURCE_DIR) / "tools" / "scenarios" / "field_site.json");
  return nlohmann::json::parse(in);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("radsurvey_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class F>
void expect_code(F&& fn, ErrorCode code) {
  try {
    fn();
    ADD_FAILURE() << "no error raised";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

// One full pipeline run, shared by the tests that only read it.
class PipelineRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(fresh_dir("pipeline"));
    auto m = Mission::create(*dir_, bundled_scenario(), std::nullopt, std::nullopt);
    const auto out = m.run_all();
    ASSERT_EQ(out.stage, Stage::Localized) << out.message;
  }
  static void TearDownTestSuite() {
    fs::remove_all(*dir_);
    delete dir_;
  }
  static fs::path* dir_;
};
fs::path* PipelineRun::dir_ = nullptr;

TEST_F(PipelineRun, ArtifactsCarryTheConfigHash) {
  const auto m = Mission::open(*dir_);
  EXPECT_EQ(m.state().artifacts.size(), static_cast<std::size_t>(kStageCount - 1));
  for (int s = 1; s < kStageCount; ++s) {
    const auto stage = static_cast<Stage>(s);
    const std::string text = m.artifact_text(stage);
    if (artifact_file(stage).ends_with(".csv"))
      EXPECT_TRUE(text.starts_with("# config_hash=" + m.state().config_hash)) << to_string(stage);
    else
      EXPECT_EQ(m.artifact_json(stage).at("config_hash"), m.state().config_hash) << to_string(stage);
  }
}

TEST_F(PipelineRun, RerunningAStageGivesIdenticalBytes) {
  auto m = Mission::open(*dir_);
  const std::string before = m.artifact_text(Stage::Localized);
  const std::string coverage = m.artifact_text(Stage::CoveragePlanned);
  m.run_stage(Stage::CoveragePlanned);
  // Unchanged bytes keep downstream stages.
  EXPECT_EQ(m.state().stage, Stage::Localized);
  EXPECT_EQ(m.artifact_text(Stage::CoveragePlanned), coverage);
  m.run_stage(Stage::Localized);
  EXPECT_EQ(m.artifact_text(Stage::Localized), before);
}

TEST_F(PipelineRun, SecondMissionReproducesEveryArtifact) {
  const fs::path other = fresh_dir("repro");
  auto m = Mission::create(other, bundled_scenario(), std::nullopt, std::nullopt);
  ASSERT_EQ(m.run_all().stage, Stage::Localized);
  for (const auto& e : fs::directory_iterator(*dir_ / "artifacts"))
    EXPECT_EQ(slurp(e.path()), slurp(other / "artifacts" / e.path().filename())) << e.path().filename();
  fs::remove_all(other);
}

TEST_F(PipelineRun, MarginPullsWeakSourcesIntoTheRoi) {
  const auto m = Mission::open(*dir_);
  const auto rois_json = m.artifact_json(Stage::RoisDetected).at("rois");
  std::vector<geo::RegionPolygon> rois;
  for (const auto& r : rois_json) rois.push_back(geo::polygon_from_json(r));
  const auto& truth = m.scenario().field.sources;
  auto inside_any = [](const std::vector<geo::RegionPolygon>& ps, const sim::RadSource& s) {
    for (const auto& p : ps)
      if (geo::point_in_region(p, s.x, s.y)) return true;
    return false;
  };
  const auto enlarged = enlarge_rois(rois, 3.0);
  for (const std::string id : {"s1", "s4"}) {
    const auto it = std::find_if(truth.begin(), truth.end(), [&](const auto& s) { return s.id == id; });
    ASSERT_NE(it, truth.end());
    EXPECT_FALSE(inside_any(rois, *it)) << id;
    EXPECT_TRUE(inside_any(enlarged, *it)) << id;
  }
}

TEST_F(PipelineRun, ReportListsEverySource) {
  const auto m = Mission::open(*dir_);
  const auto rep = m.report();
  ASSERT_EQ(rep.at("sources").size(), m.scenario().field.sources.size());
  for (const auto& row : rep.at("sources")) {
    EXPECT_TRUE(row.contains("zone"));
    const bool matched = !row.at("error_ugv").is_null();
    EXPECT_EQ(row.at("comment") == "--", matched) << row.dump();
  }
  EXPECT_LT(rep.at("mean_error_ugv").get<double>(), 0.2);
  EXPECT_NE(m.report_table().find("mean UGV error"), std::string::npos);
}

TEST(MissionGates, PendingUntilOperatorInputs) {
  auto scenario = bundled_scenario();
  scenario.erase("operator");
  const fs::path dir = fresh_dir("gates");
  auto m = Mission::create(dir, scenario, std::nullopt, std::nullopt);
  auto out = m.run_all();
  EXPECT_TRUE(out.pending);
  EXPECT_EQ(out.pending_input, kValidateObstacles);
  EXPECT_EQ(out.stage, Stage::ObstaclesReady);

  const auto v = m.state().version;
  expect_code([&] { m.validate_obstacles(v + 5); }, ErrorCode::Conflict);
  EXPECT_EQ(m.state().version, v);
  m.validate_obstacles(v);
  out = m.run_all();
  EXPECT_TRUE(out.pending);
  EXPECT_EQ(out.pending_input, kUnloadPoints);
  EXPECT_EQ(out.stage, Stage::CoveragePlanned);

  m.set_unload_points({{72.0, 61.0}, {130.0, 10.0}});
  out = m.run_all();
  EXPECT_FALSE(out.pending);
  EXPECT_EQ(out.stage, Stage::Localized);

  // A manual obstacle redoes the obstacle stage at once and marks its cells.
  m.set_manual_obstacles({geo::RegionPolygon{fixture::rect(60, 60, 64, 64), {}}});
  EXPECT_EQ(m.state().stage, Stage::ObstaclesReady);
  const auto fused = trav::fused_map_from_json(m.artifact_json(Stage::ObstaclesReady).at("fused"));
  const auto cell = fused.grid.geometry.cell_of(62.0, 62.0);
  ASSERT_TRUE(cell.has_value());
  EXPECT_TRUE(fused.grid.at(cell->row, cell->col));
  EXPECT_TRUE(fused.provenance[fused.grid.geometry.index(cell->row, cell->col)] & trav::kManual);
  fs::remove_all(dir);
}

TEST(MissionSequencing, StagesRunInOrder) {
  const fs::path dir = fresh_dir("seq");
  auto m = Mission::create(dir, bundled_scenario(), std::nullopt, std::nullopt);
  expect_code([&] { m.run_stage(Stage::AerialSurveyed); }, ErrorCode::Sequencing);
  expect_code([&] { (void)m.artifact_text(Stage::TerrainReady); }, ErrorCode::Sequencing);
  EXPECT_EQ(m.run_stage(Stage::TerrainReady).stage, Stage::TerrainReady);
  expect_code([&] { Mission::create(dir, bundled_scenario(), std::nullopt, std::nullopt); }, ErrorCode::Io);
  fs::remove_all(dir);
}

TEST(MissionConfigChange, StaleUpstreamNeedsForce) {
  const fs::path dir = fresh_dir("stale");
  auto m = Mission::create(dir, bundled_scenario(), std::nullopt, std::nullopt);
  m.run_stage(Stage::TerrainReady);
  m.run_stage(Stage::AerialPlanned);
  auto cfg = config_to_json(m.config());
  cfg["aerial"]["speed"] = 3.0;
  m.set_config(cfg);
  expect_code([&] { m.run_stage(Stage::AerialSurveyed); }, ErrorCode::StaleConfig);
  EXPECT_EQ(m.run_stage(Stage::AerialSurveyed, true).stage, Stage::AerialSurveyed);
  // Reopening from disk sees the same state.
  const auto again = Mission::open(dir);
  EXPECT_EQ(again.state().stage, Stage::AerialSurveyed);
  EXPECT_EQ(again.config().aerial.speed, 3.0);
  fs::remove_all(dir);
}

TEST(EnlargeRois, ZeroMarginAndSquareArea) {
  const std::vector<geo::RegionPolygon> sq = {{fixture::rect(0, 0, 10, 10), {}}};
  const auto same = enlarge_rois(sq, 0.0);
  ASSERT_EQ(same.size(), 1u);
  EXPECT_NEAR(geo::polygon_area(same[0]), 100.0, 1e-9);
  for (double m : {0.5, 2.0, 3.0}) {
    const auto big = enlarge_rois(sq, m);
    const double want = 100.0 + 4 * 10 * m + std::numbers::pi * m * m;
    // The disc is polygonized, so the rounded corners fall slightly short.
    EXPECT_NEAR(geo::polygon_area(big[0]), want, 0.01 * std::numbers::pi * m * m) << m;
    EXPECT_LE(geo::polygon_area(big[0]), want + 1e-9);
  }
  EXPECT_THROW(enlarge_rois(sq, -1.0), Error);
}

TEST(MissionConfigJson, RoundTripAndUnknownKeys) {
  MissionConfig c;
  c.aerial.strip_spacing = 7.5;
  c.localization.fit_background = true;
  c.ground.inflation = 2;
  c.seed = 99;
  const auto back = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
  EXPECT_EQ(back.aerial.strip_spacing, 7.5);
  expect_code([] { config_from_json({{"aerial", {{"strip_spacin", 5}}}}); }, ErrorCode::Config);
  expect_code([] { config_from_json({{"bogus", 1}}); }, ErrorCode::Config);
  MissionConfig bad;
  bad.ground.line_spacing = 0.0;
  expect_code([&] { validate(bad); }, ErrorCode::Config);
}

TEST(StageNames, RoundTripAndCase) {
  for (int s = 0; s < kStageCount; ++s) {
    const auto stage = static_cast<Stage>(s);
    EXPECT_EQ(stage_from_string(to_string(stage)), stage);
  }
  EXPECT_EQ(stage_from_string("localized"), Stage::Localized);
  EXPECT_TRUE(artifact_file(Stage::Created).empty());
  expect_code([] { stage_from_string("nope"); }, ErrorCode::Config);
  EXPECT_EQ(consumer_of(kUnloadPoints), Stage::RoutesPlanned);
  EXPECT_EQ(consumer_of(kValidateObstacles), Stage::ObstaclesValidated);
}

TEST(Sha256, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

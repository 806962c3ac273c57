#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

// Runs the CLI through the shell and captures stdout plus stderr.
Result cli(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / ("radsurveyor_cli_" + std::to_string(::getpid()) + ".log");
  const std::string cmd = std::string(RADSURVEYOR_BIN) + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  fs::remove(log);
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("radsurveyor_cli_mission_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    // The bundled scenario without its operator block, so the gates stay open.
    std::ifstream in(fs::path(RADSURVEY_SOURCE_DIR) / "tools" / "scenarios" / "field_site.json");
    auto sc = nlohmann::json::parse(in);
    sc.erase("operator");
    scenario_ = dir_.string() + ".scenario.json";
    std::ofstream(scenario_) << sc.dump();
  }
  void TearDown() override {
    fs::remove_all(dir_);
    fs::remove(scenario_);
  }
  std::string md() const { return "--mission-dir " + dir_.string(); }
  fs::path dir_;
  std::string scenario_;
};

}  // namespace

TEST_F(Cli, ExitCodesAcrossAMission) {
  ASSERT_EQ(cli("new " + md() + " --scenario " + scenario_).code, 0);
  EXPECT_EQ(cli("new " + md() + " --scenario " + scenario_).code, 2);  // already exists

  auto r = cli("run NotAStage " + md());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("config:"), std::string::npos) << r.out;
  r = cli("run AerialSurveyed " + md());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("sequencing:"), std::string::npos) << r.out;
  EXPECT_EQ(cli("report " + md()).code, 2);

  EXPECT_EQ(cli("run TerrainReady " + md()).code, 0);
  r = cli("run-all " + md());
  EXPECT_EQ(r.code, 3) << r.out;
  EXPECT_NE(r.out.find("pending"), std::string::npos);

  EXPECT_EQ(cli("operator validate-obstacles " + md()).code, 0);
  EXPECT_EQ(cli("run-all " + md()).code, 3);  // now waiting for unloading points

  const std::string pts = dir_.string() + "/unload.json";
  std::ofstream(pts) << R"({"points": [[72.0, 61.0], [130.0, 10.0]]})";
  EXPECT_EQ(cli("operator unload-points " + md() + " --file " + pts).code, 0);
  EXPECT_EQ(cli("operator nonsense " + md()).code, 2);
  r = cli("run-all " + md());
  ASSERT_EQ(r.code, 0) << r.out;

  r = cli("report " + md());
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("mean UGV error"), std::string::npos);
  r = cli("report --json " + md());
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("sources").size(), 8u);
}

TEST_F(Cli, ConfigOverrideMakesUpstreamStale) {
  ASSERT_EQ(cli("new " + md() + " --scenario " + scenario_).code, 0);
  ASSERT_EQ(cli("run TerrainReady " + md()).code, 0);
  auto r = cli("run AerialPlanned " + md() + " --seed 5");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("stale_config:"), std::string::npos) << r.out;
  EXPECT_EQ(cli("run AerialPlanned " + md() + " --force").code, 0);
}

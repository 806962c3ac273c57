#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "radsurvey/mission/mission.hpp"
#include "radsurvey/mission/service.hpp"
#include "radsurvey/trav/traversability.hpp"

// Last: <resolv.h> from httplib defines macros that clash with other headers.
#include <httplib.h>

using namespace radsurvey;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("radsurvey_service_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    std::ifstream in(fs::path(RADSURVEY_SOURCE_DIR) / "tools" / "scenarios" / "field_site.json");
    auto sc = json::parse(in);
    sc.erase("operator");
    mission::Mission::create(dir_, sc, std::nullopt, std::nullopt);
    service_ = std::make_unique<mission::Service>(dir_);
    port_ = service_->bind("127.0.0.1", 0);
    thread_ = std::thread([this] { service_->listen(); });
  }
  void TearDown() override {
    service_->stop();
    thread_.join();
    service_.reset();
    fs::remove_all(dir_);
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(60, 0);
    return c;
  }
  json get(const std::string& path) const {
    auto res = client().Get(path);
    EXPECT_TRUE(res);
    return json::parse(res->body);
  }
  std::pair<int, json> post(const std::string& path, const json& body) const {
    auto res = client().Post(path, body.dump(), "application/json");
    EXPECT_TRUE(res);
    return {res->status, json::parse(res->body)};
  }
  std::uint64_t version() const { return get("/state").at("version").get<std::uint64_t>(); }
  void advance(const std::string& stage) const {
    const auto [status, body] = post("/advance/" + stage, {{"version", version()}});
    ASSERT_EQ(status, 200) << body.dump();
  }

  fs::path dir_;
  std::unique_ptr<mission::Service> service_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace

TEST_F(ServiceTest, StateStartsCreated) {
  const auto s = get("/state");
  EXPECT_EQ(s.at("stage"), "Created");
  EXPECT_TRUE(s.at("operator").at("unload-points").is_null());
  auto res = client().Get("/artifact/TerrainReady");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 422);
  res = client().Get("/artifact/Bogus");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
}

TEST_F(ServiceTest, ManualObstacleShowsInFusedMap) {
  for (const char* s : {"TerrainReady", "AerialPlanned", "AerialSurveyed", "RoisDetected", "ObstaclesReady"}) advance(s);
  const json poly = {{"envelope", {{60, 60}, {64, 60}, {64, 64}, {60, 64}}}, {"holes", json::array()}};
  const auto [status, body] = post("/operator/obstacles", {{"version", version()}, {"polygons", {poly}}});
  ASSERT_EQ(status, 200) << body.dump();
  EXPECT_EQ(body.at("stage"), "ObstaclesReady");
  const auto art = get("/artifact/ObstaclesReady").at("artifact");
  const auto fused = trav::fused_map_from_json(art.at("fused"));
  const auto cell = fused.grid.geometry.cell_of(62.0, 62.0);
  ASSERT_TRUE(cell.has_value());
  EXPECT_TRUE(fused.provenance[fused.grid.geometry.index(cell->row, cell->col)] & trav::kManual);

  // The validation gate answers 202 until the operator confirms.
  const auto [gate, gate_body] = post("/advance/ObstaclesValidated", {{"version", version()}});
  EXPECT_EQ(gate, 202);
  EXPECT_EQ(gate_body.at("pending_input"), mission::kValidateObstacles);
}

TEST_F(ServiceTest, StaleVersionIsRejected) {
  const auto v = version();
  const auto [ok, _] = post("/operator/sweep-dir", {{"version", v}, {"sweep_dir_deg", 45.0}});
  EXPECT_EQ(ok, 200);
  const auto [stale, body] = post("/operator/sweep-dir", {{"version", v}, {"sweep_dir_deg", 90.0}});
  EXPECT_EQ(stale, 409);
  EXPECT_EQ(body.at("code"), "conflict");
  EXPECT_EQ(get("/state").at("operator").at("sweep-dir").at("sweep_dir_deg"), 45.0);
  const auto [missing, __] = post("/operator/sweep-dir", {{"sweep_dir_deg", 10.0}});
  EXPECT_EQ(missing, 400);
}

TEST_F(ServiceTest, ConcurrentConflictingPostsHaveOneWinner) {
  for (int round = 0; round < 5; ++round) {
    const auto v = version();
    std::atomic<int> ok{0}, conflict{0};
    std::vector<std::thread> threads;
    for (int i = 0; i < 4; ++i)
      threads.emplace_back([&, i] {
        httplib::Client c("127.0.0.1", port_);
        const json body = {{"version", v}, {"margin", 1.0 + i}};
        auto res = c.Post("/operator/roi-margin", body.dump(), "application/json");
        if (!res) return;
        if (res->status == 200) ++ok;
        if (res->status == 409) ++conflict;
      });
    for (auto& t : threads) t.join();
    EXPECT_EQ(ok.load(), 1);
    EXPECT_EQ(conflict.load(), 3);
    EXPECT_EQ(version(), v + 1);
  }
}

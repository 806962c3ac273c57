#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radsurvey/geo/types.hpp"
#include "radsurvey/mission/config.hpp"
#include "radsurvey/sim/io.hpp"

namespace radsurvey::mission {

enum class Stage {
  Created,
  TerrainReady,
  AerialPlanned,
  AerialSurveyed,
  RoisDetected,
  ObstaclesReady,
  ObstaclesValidated,
  CoveragePlanned,
  RoutesPlanned,
  GroundSurveyed,
  Localized,
};

inline constexpr int kStageCount = 11;

std::string to_string(Stage s);
/// Case-insensitive; throws Config for unknown names.
Stage stage_from_string(const std::string& name);
/// `artifacts/<file>` name of a stage's output (empty for Created).
std::string artifact_file(Stage s);

/// Minkowski sum of each envelope with a disc of the given radius; holes are
/// dropped since ROIs only bound the planning area.
std::vector<geo::RegionPolygon> enlarge_rois(const std::vector<geo::RegionPolygon>& rois, double margin);

/// Operator inputs, one JSON file each under operator/.
inline constexpr const char* kManualObstacles = "obstacles";
inline constexpr const char* kUnloadPoints = "unload-points";
inline constexpr const char* kSweepDir = "sweep-dir";
inline constexpr const char* kValidateObstacles = "validate-obstacles";
inline constexpr const char* kRoiMargin = "roi-margin";

struct MissionState {
  Stage stage = Stage::Created;
  std::uint64_t version = 0;
  std::string config_hash;
  std::vector<std::string> artifacts;  // relative paths of completed stages, in stage order
};

nlohmann::json state_to_json(const MissionState& s);
MissionState state_from_json(const nlohmann::json& j);

struct RunOutcome {
  Stage stage = Stage::Created;  // stage reached after the call
  bool pending = false;          // a gated stage is waiting for operator input
  std::string pending_input;     // name of the missing operator input
  std::string message;
};

/// One mission per directory: mission.json (state), config.json,
/// scenario.json, artifacts/, operator/. Not thread-safe; the service layer
/// serializes access.
class Mission {
 public:
  /// Creates the directory layout. Operator inputs found in the scenario's
  /// `operator` block are persisted as if they had been posted.
  static Mission create(const std::filesystem::path& dir, const nlohmann::json& scenario,
                        const std::optional<nlohmann::json>& config, std::optional<std::uint64_t> seed);
  static Mission open(const std::filesystem::path& dir);

  const std::filesystem::path& dir() const { return dir_; }
  const MissionState& state() const { return state_; }
  const MissionConfig& config() const { return config_; }
  const sim::Scenario& scenario() const { return scenario_; }

  /// Replaces config.json. The next run refuses artifacts made under the old
  /// hash unless forced.
  void set_config(const nlohmann::json& config);

  /// Runs one stage. The preceding stage must be complete; re-running a
  /// completed stage keeps downstream stages when the artifact bytes are
  /// unchanged and invalidates them otherwise.
  RunOutcome run_stage(Stage s, bool force = false);
  /// Runs every remaining stage, stopping at the first pending gate.
  RunOutcome run_all(bool force = false);

  /// Operator inputs. When expected_version is given and differs from the
  /// state version a Conflict error is raised and nothing changes. Inputs
  /// consumed by completed stages roll the mission back to the stage before
  /// their consumer (manual obstacles re-run ObstaclesReady at once).
  void set_manual_obstacles(const std::vector<geo::RegionPolygon>& polys, std::optional<std::uint64_t> expected_version = {});
  void set_unload_points(const std::vector<geo::Point2>& pts, std::optional<std::uint64_t> expected_version = {});
  void set_sweep_dir(std::optional<double> degrees, std::optional<std::uint64_t> expected_version = {});
  void set_roi_margin(double margin, std::optional<std::uint64_t> expected_version = {});
  void validate_obstacles(std::optional<std::uint64_t> expected_version = {});

  std::optional<nlohmann::json> operator_input(const std::string& name) const;
  /// Raw bytes of a completed stage's artifact; Sequencing error otherwise.
  std::string artifact_text(Stage s) const;
  nlohmann::json artifact_json(Stage s) const;

  /// Score summary of a localized mission.
  nlohmann::json report() const;
  std::string report_table() const;

 private:
  Mission() = default;
  void load();
  void save_state();
  void check_version(std::optional<std::uint64_t> expected) const;
  void write_operator(const std::string& name, const nlohmann::json& j);
  void roll_back_to(Stage s);
  std::string hash() const;
  std::string produce(Stage s);  // artifact bytes
  std::optional<std::string> missing_input(Stage s) const;
  void check_upstream_hashes(Stage s, bool force) const;
  std::filesystem::path artifact_path(Stage s) const;

  std::filesystem::path dir_;
  MissionState state_;
  MissionConfig config_;
  nlohmann::json config_json_;
  sim::Scenario scenario_;
  nlohmann::json scenario_json_;
};

/// Stage that consumes an operator input.
Stage consumer_of(const std::string& input);

}  // namespace radsurvey::mission

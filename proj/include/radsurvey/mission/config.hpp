#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "radsurvey/gridding/hotspots.hpp"
#include "radsurvey/loc/localization.hpp"
#include "radsurvey/trav/traversability.hpp"

namespace radsurvey::mission {

struct AerialConfig {
  double strip_spacing = 10.0;
  double heading_deg = 0.0;
  double speed = 2.0;
  double sampling_period = 1.0;
  double agl_height = 15.0;
  double segment_size = 10.0;
  int filter_window = 5;
  bool nearest_sampling = false;
};

struct RoiConfig {
  int downsample = 4;          // consecutive aerial samples summed per point
  double grid_cell = 1.0;      // m, interpolated aerial map
  gridding::HotspotConfig hotspot;
  double margin = 0.0;         // m, ROI enlargement before ground planning
  loc::ThresholdBasis basis = loc::ThresholdBasis::Measurements;
};

struct GroundConfig {
  double line_spacing = 2.0;
  double clearance = 0.25;
  double speed = 0.5;
  double sampling_period = 1.0;
  double detector_height = 0.5;
  int inflation = 1;           // cells
  bool allow_reverse = true;
};

struct LocalizationConfig {
  double grid_cell = 0.1;
  int min_samples = 4;
  loc::ThresholdBasis basis = loc::ThresholdBasis::Measurements;
  double tol = 1e-8;
  int max_iter = 100;
  bool fit_background = false;
  double restart_offset = 1.0;     // m, source shift for fit restarts, 0 to disable
  double max_match = 2.0;          // m, score association radius for ground estimates
  double aerial_max_match = 10.0;  // m, same for aerial estimates
  int stripping_reference_roi = -1;  // ROI whose data estimates the stripping coefficient
};

struct MissionConfig {
  AerialConfig aerial;
  RoiConfig roi;
  trav::ObstacleConfig obstacles;
  trav::RegionConfig regions;
  GroundConfig ground;
  LocalizationConfig localization;
  std::uint64_t seed = 1;      // aerial survey seed; the ground survey uses seed + 1
};

/// Missing keys keep their defaults; unknown keys are rejected.
MissionConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const MissionConfig& c);
/// Throws Config for values that violate a module precondition.
void validate(const MissionConfig& c);

/// Hex SHA-256 of the bytes.
std::string sha256_hex(const std::string& bytes);

}  // namespace radsurvey::mission

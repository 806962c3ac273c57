#pragma once

// Stage computations of the mission pipeline. Each producer returns the
// artifact bytes; inputs come from earlier artifacts through the context.

#include <functional>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "radsurvey/mission/mission.hpp"

namespace radsurvey::mission::detail {

struct StageContext {
  const MissionConfig& config;
  const sim::Scenario& scenario;
  std::string config_hash;
  std::function<std::string(Stage)> artifact;                            // raw bytes
  std::function<std::optional<nlohmann::json>(const std::string&)> input;  // operator input
};

std::string produce_terrain(const StageContext& ctx);
std::string produce_aerial_plan(const StageContext& ctx);
std::string produce_aerial_survey(const StageContext& ctx);
std::string produce_rois(const StageContext& ctx);
std::string produce_obstacles(const StageContext& ctx);
std::string produce_validation(const StageContext& ctx);
std::string produce_coverage(const StageContext& ctx);
std::string produce_routes(const StageContext& ctx);
std::string produce_ground_survey(const StageContext& ctx);
std::string produce_localization(const StageContext& ctx);

/// Survey area of the scenario: its `survey_area` polygon or the terrain extent.
geo::RegionPolygon survey_area(const sim::Scenario& sc);

/// Config hash recorded in an artifact (JSON key or CSV `# config_hash=` line).
std::string embedded_hash(const std::string& artifact_bytes);

}  // namespace radsurvey::mission::detail

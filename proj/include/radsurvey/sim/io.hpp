#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radsurvey/sim/field.hpp"
#include "radsurvey/sim/terrain.hpp"

namespace radsurvey::sim {

// Measurement CSV: header `t,x,y,z_agl,counts,dose_rate[,w_cs,w_co]`,
// optionally preceded by `#` metadata lines that readers skip.
// Window columns are written only when every measurement carries them.
std::string measurements_to_csv(const std::vector<Measurement>& ms);
std::vector<Measurement> measurements_from_csv(const std::string& text);

nlohmann::json source_to_json(const RadSource& s);
RadSource source_from_json(const nlohmann::json& j, const Calibration& cal);

/// Scenario file: terrain spec, sources, background, calibration, spectral
/// model and seed. The `operator` block, when present, is kept verbatim for
/// the mission layer.
struct Scenario {
  std::string name;
  TerrainSpec terrain;
  RadiationField field;
  std::uint64_t seed = 1;
  nlohmann::json extra = nlohmann::json::object();  // mission-level sections
};

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);

}  // namespace radsurvey::sim

#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "radsurvey/geo/types.hpp"

namespace radsurvey::sim {

/// Linear rise along `direction` (radians, 0 = +x) between offsets `start`
/// and `start + length` measured from (x0, y0); constant beyond. A non-empty
/// `band` limits the ramp to |perpendicular offset| <= band / 2.
struct RampFeature {
  double x0 = 0.0, y0 = 0.0;
  double direction = 0.0;
  double start = 0.0;
  double length = 10.0;
  double slope_deg = 10.0;
  double band = 0.0;
};

/// Gaussian hill height * exp(-r^2 / (2 sigma^2)); the steepest slope is
/// atan(height / sigma * e^-0.5).
struct HillFeature {
  double cx = 0.0, cy = 0.0;
  double height = 5.0;
  double sigma = 5.0;
};

/// Axis-aligned raised block (vehicles, walls, curbs); negative heights dig.
struct BlockFeature {
  double x_min = 0.0, y_min = 0.0, x_max = 1.0, y_max = 1.0;
  double height = 1.0;
};

using TerrainFeature = std::variant<RampFeature, HillFeature, BlockFeature>;

struct TerrainSpec {
  double origin_x = 0.0, origin_y = 0.0;
  double width = 100.0, height = 100.0;
  double cell_size = 0.25;
  double base_height = 0.0;
  std::vector<TerrainFeature> features;
  double noise_amplitude = 0.0;   // peak amplitude of lattice value noise, m
  double noise_wavelength = 5.0;  // lattice spacing, m
  std::uint64_t seed = 1;
};

/// Deterministic per spec (including the noise seed).
geo::Dem synth_terrain(const TerrainSpec& spec);

nlohmann::json terrain_spec_to_json(const TerrainSpec& spec);
TerrainSpec terrain_spec_from_json(const nlohmann::json& j);

}  // namespace radsurvey::sim

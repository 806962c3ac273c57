#include "radsurvey/sim/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "radsurvey/error.hpp"

namespace radsurvey::sim {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double feature_height(const RampFeature& f, double x, double y) {
  const double ux = std::cos(f.direction);
  const double uy = std::sin(f.direction);
  const double along = (x - f.x0) * ux + (y - f.y0) * uy;
  if (f.band > 0.0) {
    const double across = -(x - f.x0) * uy + (y - f.y0) * ux;
    if (std::abs(across) > 0.5 * f.band) return 0.0;
  }
  const double s = std::clamp(along - f.start, 0.0, f.length);
  return s * std::tan(f.slope_deg * kDeg);
}

double feature_height(const HillFeature& f, double x, double y) {
  const double dx = x - f.cx;
  const double dy = y - f.cy;
  return f.height * std::exp(-(dx * dx + dy * dy) / (2.0 * f.sigma * f.sigma));
}

double feature_height(const BlockFeature& f, double x, double y) {
  return (x >= f.x_min && x < f.x_max && y >= f.y_min && y < f.y_max) ? f.height : 0.0;
}

}  // namespace

geo::Dem synth_terrain(const TerrainSpec& spec) {
  if (!(spec.width > 0.0) || !(spec.height > 0.0)) fail(ErrorCode::Config, "terrain extent must be positive");
  if (!(spec.cell_size > 0.0)) fail(ErrorCode::Config, "terrain cell_size must be positive");
  if (spec.noise_amplitude > 0.0 && !(spec.noise_wavelength > 0.0))
    fail(ErrorCode::Config, "noise wavelength must be positive");

  geo::GridGeometry g;
  g.origin_x = spec.origin_x;
  g.origin_y = spec.origin_y;
  g.cell_size = spec.cell_size;
  g.cols = static_cast<int>(std::ceil(spec.width / spec.cell_size - 1e-9));
  g.rows = static_cast<int>(std::ceil(spec.height / spec.cell_size - 1e-9));
  g.validate();

  // Value noise on a coarse lattice, bilinearly interpolated.
  int lattice_cols = 0;
  int lattice_rows = 0;
  std::vector<double> lattice;
  if (spec.noise_amplitude > 0.0) {
    lattice_cols = static_cast<int>(std::ceil(spec.width / spec.noise_wavelength)) + 2;
    lattice_rows = static_cast<int>(std::ceil(spec.height / spec.noise_wavelength)) + 2;
    std::mt19937_64 engine(spec.seed);
    lattice.resize(static_cast<std::size_t>(lattice_cols) * static_cast<std::size_t>(lattice_rows));
    for (auto& v : lattice) v = (static_cast<double>(engine() >> 11) * 0x1.0p-53 * 2.0 - 1.0) * spec.noise_amplitude;
  }
  auto noise_at = [&](double x, double y) {
    if (lattice.empty()) return 0.0;
    const double u = (x - spec.origin_x) / spec.noise_wavelength;
    const double v = (y - spec.origin_y) / spec.noise_wavelength;
    const int i = std::clamp(static_cast<int>(std::floor(u)), 0, lattice_cols - 2);
    const int j = std::clamp(static_cast<int>(std::floor(v)), 0, lattice_rows - 2);
    const double fu = u - i;
    const double fv = v - j;
    auto at = [&](int a, int b) { return lattice[static_cast<std::size_t>(b) * lattice_cols + a]; };
    return (1 - fv) * ((1 - fu) * at(i, j) + fu * at(i + 1, j)) + fv * ((1 - fu) * at(i, j + 1) + fu * at(i + 1, j + 1));
  };

  std::vector<double> heights(g.size());
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      const geo::Point2 p = g.center(r, c);
      double h = spec.base_height + noise_at(p.x, p.y);
      for (const auto& f : spec.features) h += std::visit([&](const auto& feat) { return feature_height(feat, p.x, p.y); }, f);
      heights[g.index(r, c)] = h;
    }
  }
  return geo::Dem(g, std::move(heights));
}

nlohmann::json terrain_spec_to_json(const TerrainSpec& spec) {
  using nlohmann::json;
  json features = json::array();
  for (const auto& f : spec.features) {
    if (const auto* r = std::get_if<RampFeature>(&f)) {
      features.push_back({{"type", "ramp"}, {"x0", r->x0}, {"y0", r->y0}, {"direction_deg", r->direction / kDeg},
                          {"start", r->start}, {"length", r->length}, {"slope_deg", r->slope_deg}, {"band", r->band}});
    } else if (const auto* h = std::get_if<HillFeature>(&f)) {
      features.push_back({{"type", "hill"}, {"cx", h->cx}, {"cy", h->cy}, {"height", h->height}, {"sigma", h->sigma}});
    } else if (const auto* b = std::get_if<BlockFeature>(&f)) {
      features.push_back({{"type", "block"}, {"x_min", b->x_min}, {"y_min", b->y_min}, {"x_max", b->x_max},
                          {"y_max", b->y_max}, {"height", b->height}});
    }
  }
  return json{{"origin_x", spec.origin_x},
              {"origin_y", spec.origin_y},
              {"width", spec.width},
              {"height", spec.height},
              {"cell_size", spec.cell_size},
              {"base_height", spec.base_height},
              {"features", features},
              {"noise_amplitude", spec.noise_amplitude},
              {"noise_wavelength", spec.noise_wavelength},
              {"seed", spec.seed}};
}

TerrainSpec terrain_spec_from_json(const nlohmann::json& j) {
  TerrainSpec spec;
  try {
    spec.origin_x = j.value("origin_x", 0.0);
    spec.origin_y = j.value("origin_y", 0.0);
    spec.width = j.at("width").get<double>();
    spec.height = j.at("height").get<double>();
    spec.cell_size = j.at("cell_size").get<double>();
    spec.base_height = j.value("base_height", 0.0);
    spec.noise_amplitude = j.value("noise_amplitude", 0.0);
    spec.noise_wavelength = j.value("noise_wavelength", 5.0);
    spec.seed = j.value("seed", std::uint64_t{1});
    for (const auto& f : j.value("features", nlohmann::json::array())) {
      const std::string type = f.at("type").get<std::string>();
      if (type == "ramp") {
        RampFeature r;
        r.x0 = f.value("x0", 0.0);
        r.y0 = f.value("y0", 0.0);
        r.direction = f.value("direction_deg", 0.0) * kDeg;
        r.start = f.value("start", 0.0);
        r.length = f.at("length").get<double>();
        r.slope_deg = f.at("slope_deg").get<double>();
        r.band = f.value("band", 0.0);
        spec.features.emplace_back(r);
      } else if (type == "hill") {
        HillFeature h;
        h.cx = f.at("cx").get<double>();
        h.cy = f.at("cy").get<double>();
        h.height = f.at("height").get<double>();
        h.sigma = f.at("sigma").get<double>();
        spec.features.emplace_back(h);
      } else if (type == "block") {
        BlockFeature b;
        b.x_min = f.at("x_min").get<double>();
        b.y_min = f.at("y_min").get<double>();
        b.x_max = f.at("x_max").get<double>();
        b.y_max = f.at("y_max").get<double>();
        b.height = f.at("height").get<double>();
        spec.features.emplace_back(b);
      } else {
        fail(ErrorCode::Config, "unknown terrain feature '" + type + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Config, std::string("terrain spec: ") + e.what());
  }
  return spec;
}

}  // namespace radsurvey::sim

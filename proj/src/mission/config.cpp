#include "radsurvey/mission/config.hpp"

#include <set>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "radsurvey/error.hpp"

namespace radsurvey::mission {

using nlohmann::json;

namespace {

// Reads known keys of one section and rejects the rest, so that a typo in a
// config file cannot silently fall back to a default.
class Section {
 public:
  Section(const json& parent, const std::string& name) : name_(name) {
    if (!parent.contains(name)) return;
    j_ = &parent.at(name);
    if (!j_->is_object()) fail(ErrorCode::Config, fmt::format("config section '{}' must be an object", name));
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_ || !j_->contains(key)) return;
    try {
      out = j_->at(key).get<T>();
    } catch (const json::exception&) {
      fail(ErrorCode::Config, fmt::format("config key {}.{} has the wrong type", name_, key));
    }
  }

  void finish() const {
    if (!j_) return;
    for (const auto& [k, v] : j_->items())
      if (!seen_.count(k)) fail(ErrorCode::Config, fmt::format("unknown config key {}.{}", name_, k));
  }

 private:
  std::string name_;
  const json* j_ = nullptr;
  std::set<std::string> seen_;
};

std::string basis_name(loc::ThresholdBasis b) {
  return b == loc::ThresholdBasis::Measurements ? "measurements" : "grid";
}

loc::ThresholdBasis basis_from_name(const std::string& s, const char* section) {
  if (s == "measurements") return loc::ThresholdBasis::Measurements;
  if (s == "grid") return loc::ThresholdBasis::GridCells;
  fail(ErrorCode::Config, fmt::format("{}.threshold_basis must be 'measurements' or 'grid'", section));
}

}  // namespace

MissionConfig config_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::Config, "config must be a JSON object");
  static const std::set<std::string> sections{"aerial", "roi", "obstacles", "regions", "ground", "localization", "seed"};
  for (const auto& [k, v] : j.items())
    if (!sections.count(k)) fail(ErrorCode::Config, fmt::format("unknown config section '{}'", k));

  MissionConfig c;
  {
    Section s(j, "aerial");
    s.get("strip_spacing", c.aerial.strip_spacing);
    s.get("heading_deg", c.aerial.heading_deg);
    s.get("speed", c.aerial.speed);
    s.get("sampling_period", c.aerial.sampling_period);
    s.get("agl_height", c.aerial.agl_height);
    s.get("segment_size", c.aerial.segment_size);
    s.get("filter_window", c.aerial.filter_window);
    s.get("nearest_sampling", c.aerial.nearest_sampling);
    s.finish();
  }
  {
    Section s(j, "roi");
    s.get("downsample", c.roi.downsample);
    s.get("grid_cell", c.roi.grid_cell);
    s.get("min_samples", c.roi.hotspot.min_samples);
    s.get("erode_radius", c.roi.hotspot.erode_radius);
    s.get("dilate_radius", c.roi.hotspot.dilate_radius);
    s.get("max_vertices", c.roi.hotspot.max_vertices);
    s.get("margin", c.roi.margin);
    std::string basis = basis_name(c.roi.basis);
    s.get("threshold_basis", basis);
    s.finish();
    c.roi.basis = basis_from_name(basis, "roi");
  }
  {
    Section s(j, "obstacles");
    s.get("max_slope_deg", c.obstacles.max_slope_deg);
    s.get("max_step", c.obstacles.max_step);
    s.get("pixel_size", c.obstacles.pixel_size);
    s.finish();
  }
  {
    Section s(j, "regions");
    s.get("min_area", c.regions.min_area);
    s.get("max_vertices", c.regions.max_vertices);
    s.finish();
  }
  {
    Section s(j, "ground");
    s.get("line_spacing", c.ground.line_spacing);
    s.get("clearance", c.ground.clearance);
    s.get("speed", c.ground.speed);
    s.get("sampling_period", c.ground.sampling_period);
    s.get("detector_height", c.ground.detector_height);
    s.get("inflation", c.ground.inflation);
    s.get("allow_reverse", c.ground.allow_reverse);
    s.finish();
  }
  {
    Section s(j, "localization");
    std::string basis = basis_name(c.localization.basis);
    s.get("grid_cell", c.localization.grid_cell);
    s.get("min_samples", c.localization.min_samples);
    s.get("threshold_basis", basis);
    s.get("tol", c.localization.tol);
    s.get("max_iter", c.localization.max_iter);
    s.get("fit_background", c.localization.fit_background);
    s.get("restart_offset", c.localization.restart_offset);
    s.get("max_match", c.localization.max_match);
    s.get("aerial_max_match", c.localization.aerial_max_match);
    s.get("stripping_reference_roi", c.localization.stripping_reference_roi);
    s.finish();
    c.localization.basis = basis_from_name(basis, "localization");
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) fail(ErrorCode::Config, "seed must be a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  validate(c);
  return c;
}

json config_to_json(const MissionConfig& c) {
  return json{
      {"aerial",
       {{"strip_spacing", c.aerial.strip_spacing},
        {"heading_deg", c.aerial.heading_deg},
        {"speed", c.aerial.speed},
        {"sampling_period", c.aerial.sampling_period},
        {"agl_height", c.aerial.agl_height},
        {"segment_size", c.aerial.segment_size},
        {"filter_window", c.aerial.filter_window},
        {"nearest_sampling", c.aerial.nearest_sampling}}},
      {"roi",
       {{"downsample", c.roi.downsample},
        {"grid_cell", c.roi.grid_cell},
        {"min_samples", c.roi.hotspot.min_samples},
        {"erode_radius", c.roi.hotspot.erode_radius},
        {"dilate_radius", c.roi.hotspot.dilate_radius},
        {"max_vertices", c.roi.hotspot.max_vertices},
        {"margin", c.roi.margin},
        {"threshold_basis", basis_name(c.roi.basis)}}},
      {"obstacles",
       {{"max_slope_deg", c.obstacles.max_slope_deg},
        {"max_step", c.obstacles.max_step},
        {"pixel_size", c.obstacles.pixel_size}}},
      {"regions", {{"min_area", c.regions.min_area}, {"max_vertices", c.regions.max_vertices}}},
      {"ground",
       {{"line_spacing", c.ground.line_spacing},
        {"clearance", c.ground.clearance},
        {"speed", c.ground.speed},
        {"sampling_period", c.ground.sampling_period},
        {"detector_height", c.ground.detector_height},
        {"inflation", c.ground.inflation},
        {"allow_reverse", c.ground.allow_reverse}}},
      {"localization",
       {{"grid_cell", c.localization.grid_cell},
        {"min_samples", c.localization.min_samples},
        {"threshold_basis", basis_name(c.localization.basis)},
        {"tol", c.localization.tol},
        {"max_iter", c.localization.max_iter},
        {"fit_background", c.localization.fit_background},
        {"restart_offset", c.localization.restart_offset},
        {"max_match", c.localization.max_match},
        {"aerial_max_match", c.localization.aerial_max_match},
        {"stripping_reference_roi", c.localization.stripping_reference_roi}}},
      {"seed", c.seed}};
}

void validate(const MissionConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) fail(ErrorCode::Config, what);
  };
  require(c.aerial.strip_spacing > 0.0, "aerial.strip_spacing must be positive");
  require(c.aerial.speed > 0.0, "aerial.speed must be positive");
  require(c.aerial.sampling_period > 0.0, "aerial.sampling_period must be positive");
  require(c.aerial.agl_height > 0.0, "aerial.agl_height must be positive");
  require(c.aerial.segment_size > 0.0, "aerial.segment_size must be positive");
  require(c.aerial.filter_window >= 1 && c.aerial.filter_window % 2 == 1, "aerial.filter_window must be odd and >= 1");
  require(c.roi.downsample >= 1, "roi.downsample must be >= 1");
  require(c.roi.grid_cell > 0.0, "roi.grid_cell must be positive");
  require(c.roi.hotspot.min_samples >= 0, "roi.min_samples must be >= 0");
  require(c.roi.hotspot.erode_radius >= 0.0 && c.roi.hotspot.dilate_radius >= 0.0, "roi morphology radii must be >= 0");
  require(c.roi.hotspot.max_vertices >= 3, "roi.max_vertices must be >= 3");
  require(c.roi.margin >= 0.0, "roi.margin must be >= 0");
  require(c.obstacles.max_slope_deg > 0.0 && c.obstacles.max_slope_deg < 90.0, "obstacles.max_slope_deg must be in (0, 90)");
  require(c.obstacles.max_step >= 0.0, "obstacles.max_step must be >= 0");
  require(c.obstacles.pixel_size > 0.0, "obstacles.pixel_size must be positive");
  require(c.regions.max_vertices >= 3, "regions.max_vertices must be >= 3");
  require(c.ground.line_spacing > 0.0, "ground.line_spacing must be positive");
  require(c.ground.clearance >= 0.0, "ground.clearance must be >= 0");
  require(c.ground.speed > 0.0, "ground.speed must be positive");
  require(c.ground.sampling_period > 0.0, "ground.sampling_period must be positive");
  require(c.ground.detector_height > 0.0, "ground.detector_height must be positive");
  require(c.ground.inflation >= 0, "ground.inflation must be >= 0");
  require(c.localization.grid_cell > 0.0, "localization.grid_cell must be positive");
  require(c.localization.min_samples >= 0, "localization.min_samples must be >= 0");
  require(c.localization.restart_offset >= 0.0, "localization.restart_offset must be >= 0");
  require(c.localization.tol > 0.0, "localization.tol must be positive");
  require(c.localization.max_iter >= 1, "localization.max_iter must be >= 1");
  require(c.localization.max_match > 0.0 && c.localization.aerial_max_match > 0.0,
          "localization match radii must be positive");
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorCode::Io, "SHA-256 digest failed");
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

}  // namespace radsurvey::mission

#include "radsurvey/mission/mission.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "radsurvey/error.hpp"
#include "radsurvey/geo/boost_adapt.hpp"
#include "radsurvey/geo/geometry.hpp"
#include "radsurvey/geo/io.hpp"
#include "stages.hpp"

namespace radsurvey::mission {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct StageInfo {
  Stage stage;
  const char* name;
  const char* file;
};

constexpr std::array<StageInfo, kStageCount> kStages{{
    {Stage::Created, "Created", ""},
    {Stage::TerrainReady, "TerrainReady", "terrain.json"},
    {Stage::AerialPlanned, "AerialPlanned", "aerial_plan.json"},
    {Stage::AerialSurveyed, "AerialSurveyed", "aerial_survey.csv"},
    {Stage::RoisDetected, "RoisDetected", "rois.json"},
    {Stage::ObstaclesReady, "ObstaclesReady", "obstacles.json"},
    {Stage::ObstaclesValidated, "ObstaclesValidated", "obstacles_validated.json"},
    {Stage::CoveragePlanned, "CoveragePlanned", "coverage.json"},
    {Stage::RoutesPlanned, "RoutesPlanned", "routes.json"},
    {Stage::GroundSurveyed, "GroundSurveyed", "ground_survey.csv"},
    {Stage::Localized, "Localized", "localization.json"},
}};

int idx(Stage s) { return static_cast<int>(s); }
Stage at(int i) { return static_cast<Stage>(i); }

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::optional<std::string> read_if_exists(const fs::path& p) {
  if (!fs::exists(p)) return std::nullopt;
  return geo::read_text_file(p);
}

}  // namespace

std::string to_string(Stage s) { return kStages[static_cast<std::size_t>(idx(s))].name; }

Stage stage_from_string(const std::string& name) {
  const std::string n = lower(name);
  for (const auto& info : kStages)
    if (lower(info.name) == n) return info.stage;
  fail(ErrorCode::Config, "unknown stage '" + name + "'");
}

std::string artifact_file(Stage s) { return kStages[static_cast<std::size_t>(idx(s))].file; }

Stage consumer_of(const std::string& input) {
  if (input == kManualObstacles) return Stage::ObstaclesReady;
  if (input == kValidateObstacles) return Stage::ObstaclesValidated;
  if (input == kSweepDir) return Stage::CoveragePlanned;
  if (input == kUnloadPoints) return Stage::RoutesPlanned;
  if (input == kRoiMargin) return Stage::RoisDetected;
  fail(ErrorCode::Config, "unknown operator input '" + input + "'");
}

std::vector<geo::RegionPolygon> enlarge_rois(const std::vector<geo::RegionPolygon>& rois, double margin) {
  if (!(margin >= 0.0)) fail(ErrorCode::Domain, "ROI margin must be >= 0");
  if (margin == 0.0) return rois;
  std::vector<geo::RegionPolygon> out;
  for (const auto& r : rois) {
    geo::bgx::BMulti in;
    in.push_back(geo::bgx::to_bpolygon({r.envelope, {}}));
    const auto grown = geo::bgx::buffer_round(in, margin, 360);
    if (grown.empty()) fail(ErrorCode::Geometry, "ROI enlargement produced no polygon");
    // A disc dilation of one connected envelope stays connected.
    geo::RegionPolygon p = geo::bgx::from_bpolygon(grown.front());
    p.holes.clear();
    out.push_back(std::move(p));
  }
  return out;
}

json state_to_json(const MissionState& s) {
  return {{"stage", to_string(s.stage)}, {"version", s.version}, {"config_hash", s.config_hash}, {"artifacts", s.artifacts}};
}

MissionState state_from_json(const json& j) {
  MissionState s;
  try {
    s.stage = stage_from_string(j.at("stage").get<std::string>());
    s.version = j.at("version").get<std::uint64_t>();
    s.config_hash = j.at("config_hash").get<std::string>();
    s.artifacts = j.at("artifacts").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    fail(ErrorCode::Io, std::string("corrupt mission state: ") + e.what());
  }
  if (static_cast<int>(s.artifacts.size()) != idx(s.stage)) fail(ErrorCode::Io, "corrupt mission state: artifact list");
  return s;
}

Mission Mission::create(const fs::path& dir, const json& scenario, const std::optional<json>& config,
                        std::optional<std::uint64_t> seed) {
  if (fs::exists(dir / "mission.json")) fail(ErrorCode::Io, "a mission already exists in " + dir.string());
  Mission m;
  m.dir_ = dir;
  m.scenario_ = sim::scenario_from_json(scenario);
  m.scenario_json_ = sim::scenario_to_json(m.scenario_);
  // Without an explicit config the scenario's `config` block, if any, applies.
  std::optional<json> chosen = config;
  if (!chosen && m.scenario_.extra.contains("config")) chosen = m.scenario_.extra.at("config");
  MissionConfig cfg = chosen ? config_from_json(*chosen) : MissionConfig{};
  if (seed) cfg.seed = *seed;
  else if (!chosen || !chosen->contains("seed")) cfg.seed = m.scenario_.seed;
  m.config_ = cfg;
  m.config_json_ = config_to_json(cfg);

  fs::create_directories(dir / "artifacts");
  fs::create_directories(dir / "operator");
  geo::write_file_atomic(dir / "scenario.json", m.scenario_json_.dump(2) + "\n");
  geo::write_file_atomic(dir / "config.json", m.config_json_.dump(2) + "\n");

  if (m.scenario_.extra.contains("operator")) {
    const json& op = m.scenario_.extra.at("operator");
    if (op.contains("obstacles")) m.write_operator(kManualObstacles, {{"polygons", op.at("obstacles")}});
    if (op.contains("unload_points")) m.write_operator(kUnloadPoints, {{"points", op.at("unload_points")}});
    if (op.contains("sweep_dir_deg")) m.write_operator(kSweepDir, {{"sweep_dir_deg", op.at("sweep_dir_deg")}});
    if (op.contains("roi_margin")) m.write_operator(kRoiMargin, {{"margin", op.at("roi_margin")}});
    if (op.value("validate_obstacles", false))
      m.write_operator(kValidateObstacles, {{"confirmed", true}, {"source", "scenario"}});
  }
  m.state_.config_hash = m.hash();
  m.save_state();
  return m;
}

Mission Mission::open(const fs::path& dir) {
  Mission m;
  m.dir_ = dir;
  m.load();
  return m;
}

void Mission::load() {
  if (!fs::exists(dir_ / "mission.json")) fail(ErrorCode::Io, "no mission in " + dir_.string());
  try {
    state_ = state_from_json(geo::read_json_file(dir_ / "mission.json"));
    scenario_ = sim::scenario_from_json(geo::read_json_file(dir_ / "scenario.json"));
    scenario_json_ = sim::scenario_to_json(scenario_);
    config_ = config_from_json(geo::read_json_file(dir_ / "config.json"));
    config_json_ = config_to_json(config_);
  } catch (const json::exception& e) {
    fail(ErrorCode::Io, std::string("corrupt mission files: ") + e.what());
  }
}

void Mission::save_state() { geo::write_file_atomic(dir_ / "mission.json", state_to_json(state_).dump(2) + "\n"); }

std::string Mission::hash() const { return sha256_hex(config_json_.dump() + "\n" + scenario_json_.dump()); }

void Mission::set_config(const json& config) {
  config_ = config_from_json(config);
  config_json_ = config_to_json(config_);
  geo::write_file_atomic(dir_ / "config.json", config_json_.dump(2) + "\n");
  state_.config_hash = hash();
  ++state_.version;
  save_state();
}

fs::path Mission::artifact_path(Stage s) const { return dir_ / "artifacts" / artifact_file(s); }

std::string Mission::artifact_text(Stage s) const {
  if (s == Stage::Created) fail(ErrorCode::Config, "the Created stage has no artifact");
  if (idx(s) > idx(state_.stage)) fail(ErrorCode::Sequencing, "stage " + to_string(s) + " has not been completed");
  return geo::read_text_file(artifact_path(s));
}

json Mission::artifact_json(Stage s) const {
  const std::string text = artifact_text(s);
  if (artifact_file(s).ends_with(".csv")) {
    json rows = json::array();
    for (const auto& m : sim::measurements_from_csv(text)) {
      json r{{"t", m.t}, {"x", m.x}, {"y", m.y}, {"z_agl", m.z_agl}, {"counts", m.counts}, {"dose_rate", m.dose_rate}};
      if (m.windows) {
        r["w_cs"] = m.windows->cs;
        r["w_co"] = m.windows->co;
      }
      rows.push_back(r);
    }
    return {{"config_hash", detail::embedded_hash(text)}, {"measurements", rows}};
  }
  return json::parse(text);
}

std::optional<json> Mission::operator_input(const std::string& name) const {
  const auto text = read_if_exists(dir_ / "operator" / (name + ".json"));
  if (!text) return std::nullopt;
  return json::parse(*text);
}

void Mission::write_operator(const std::string& name, const json& j) {
  geo::write_file_atomic(dir_ / "operator" / (name + ".json"), j.dump(2) + "\n");
}

void Mission::check_version(std::optional<std::uint64_t> expected) const {
  if (expected && *expected != state_.version)
    fail(ErrorCode::Conflict, fmt::format("state version is {}, request was made against {}", state_.version, *expected));
}

std::optional<std::string> Mission::missing_input(Stage s) const {
  if (s == Stage::ObstaclesValidated && !operator_input(kValidateObstacles)) return std::string(kValidateObstacles);
  if (s == Stage::RoutesPlanned) {
    const auto u = operator_input(kUnloadPoints);
    if (!u || u->at("points").empty()) return std::string(kUnloadPoints);
  }
  return std::nullopt;
}

void Mission::check_upstream_hashes(Stage s, bool force) const {
  if (force) return;
  const std::string h = hash();
  for (int i = 1; i < idx(s); ++i) {
    const std::string text = geo::read_text_file(artifact_path(at(i)));
    if (detail::embedded_hash(text) != h)
      fail(ErrorCode::StaleConfig, fmt::format("artifact of {} was produced by a different configuration; re-run it "
                                               "or force",
                                               to_string(at(i))));
  }
}

std::string Mission::produce(Stage s) {
  detail::StageContext ctx{config_, scenario_, hash(),
                           [this](Stage st) { return geo::read_text_file(artifact_path(st)); },
                           [this](const std::string& n) { return operator_input(n); }};
  switch (s) {
    case Stage::TerrainReady: return detail::produce_terrain(ctx);
    case Stage::AerialPlanned: return detail::produce_aerial_plan(ctx);
    case Stage::AerialSurveyed: return detail::produce_aerial_survey(ctx);
    case Stage::RoisDetected: return detail::produce_rois(ctx);
    case Stage::ObstaclesReady: return detail::produce_obstacles(ctx);
    case Stage::ObstaclesValidated: return detail::produce_validation(ctx);
    case Stage::CoveragePlanned: return detail::produce_coverage(ctx);
    case Stage::RoutesPlanned: return detail::produce_routes(ctx);
    case Stage::GroundSurveyed: return detail::produce_ground_survey(ctx);
    case Stage::Localized: return detail::produce_localization(ctx);
    case Stage::Created: break;
  }
  fail(ErrorCode::Config, "the Created stage cannot be run");
}

RunOutcome Mission::run_stage(Stage s, bool force) {
  if (s == Stage::Created) fail(ErrorCode::Config, "the Created stage cannot be run");
  RunOutcome out;
  out.stage = state_.stage;
  if (idx(s) > idx(state_.stage) + 1) {
    const Stage next = at(idx(state_.stage) + 1);
    if (auto missing = missing_input(next)) {
      out.pending = true;
      out.pending_input = *missing;
      out.message = fmt::format("{} needs {} before {} can run", to_string(next), *missing, to_string(s));
      return out;
    }
    fail(ErrorCode::Sequencing, fmt::format("{} requires {} (mission is at {})", to_string(s), to_string(at(idx(s) - 1)),
                                            to_string(state_.stage)));
  }
  if (auto missing = missing_input(s)) {
    out.pending = true;
    out.pending_input = *missing;
    out.message = fmt::format("{} is waiting for operator input '{}'", to_string(s), *missing);
    return out;
  }
  check_upstream_hashes(s, force);

  const std::string bytes = produce(s);
  const fs::path path = artifact_path(s);
  const bool rerun = idx(s) <= idx(state_.stage);
  const auto previous = rerun ? read_if_exists(path) : std::nullopt;
  if (previous && *previous == bytes) {
    out.message = to_string(s) + " unchanged";
    return out;
  }
  geo::write_file_atomic(path, bytes);
  if (rerun) roll_back_to(at(idx(s) - 1));
  state_.stage = s;
  state_.artifacts.push_back("artifacts/" + artifact_file(s));
  state_.config_hash = hash();
  ++state_.version;
  save_state();
  out.stage = s;
  out.message = to_string(s) + " complete";
  return out;
}

RunOutcome Mission::run_all(bool force) {
  RunOutcome out;
  out.stage = state_.stage;
  while (state_.stage != Stage::Localized) {
    out = run_stage(at(idx(state_.stage) + 1), force);
    if (out.pending) return out;
  }
  out.stage = state_.stage;
  return out;
}

void Mission::roll_back_to(Stage s) {
  if (idx(s) >= idx(state_.stage)) return;
  // A validation bound to an obstacle map no longer applies once that map is redone.
  if (idx(s) < idx(Stage::ObstaclesValidated)) {
    if (auto v = operator_input(kValidateObstacles); v && v->contains("obstacles_sha256"))
      fs::remove(dir_ / "operator" / (std::string(kValidateObstacles) + ".json"));
  }
  state_.stage = s;
  state_.artifacts.resize(static_cast<std::size_t>(idx(s)));
}

void Mission::set_manual_obstacles(const std::vector<geo::RegionPolygon>& polys, std::optional<std::uint64_t> expected) {
  check_version(expected);
  json arr = json::array();
  for (const auto& p : polys) {
    if (p.envelope.size() < 3) fail(ErrorCode::Validity, "manual obstacle needs at least 3 vertices");
    arr.push_back(geo::polygon_to_json(p));
  }
  write_operator(kManualObstacles, {{"polygons", arr}});
  ++state_.version;
  const bool recompute = idx(state_.stage) >= idx(Stage::ObstaclesReady);
  if (recompute) roll_back_to(Stage::RoisDetected);
  save_state();
  if (recompute) run_stage(Stage::ObstaclesReady);
}

void Mission::set_unload_points(const std::vector<geo::Point2>& pts, std::optional<std::uint64_t> expected) {
  check_version(expected);
  if (pts.empty()) fail(ErrorCode::Config, "at least one unloading point is required");
  json arr = json::array();
  for (const auto& p : pts) arr.push_back({p.x, p.y});
  write_operator(kUnloadPoints, {{"points", arr}});
  ++state_.version;
  roll_back_to(at(idx(Stage::RoutesPlanned) - 1));
  save_state();
}

void Mission::set_sweep_dir(std::optional<double> degrees, std::optional<std::uint64_t> expected) {
  check_version(expected);
  if (degrees && !std::isfinite(*degrees)) fail(ErrorCode::Config, "sweep direction must be finite");
  write_operator(kSweepDir, {{"sweep_dir_deg", degrees ? json(*degrees) : json(nullptr)}});
  ++state_.version;
  roll_back_to(at(idx(Stage::CoveragePlanned) - 1));
  save_state();
}

void Mission::set_roi_margin(double margin, std::optional<std::uint64_t> expected) {
  check_version(expected);
  if (!(margin >= 0.0) || !std::isfinite(margin)) fail(ErrorCode::Config, "ROI margin must be finite and >= 0");
  write_operator(kRoiMargin, {{"margin", margin}});
  ++state_.version;
  roll_back_to(at(idx(Stage::RoisDetected) - 1));
  save_state();
}

void Mission::validate_obstacles(std::optional<std::uint64_t> expected) {
  check_version(expected);
  if (idx(state_.stage) < idx(Stage::ObstaclesReady)) fail(ErrorCode::Sequencing, "no obstacle map to validate yet");
  write_operator(kValidateObstacles,
                 {{"confirmed", true}, {"obstacles_sha256", sha256_hex(artifact_text(Stage::ObstaclesReady))}});
  ++state_.version;
  save_state();
}

json Mission::report() const {
  const json loc = artifact_json(Stage::Localized);
  const auto rois = geo::polygons_from_json(json::parse(artifact_text(Stage::RoisDetected)).at("rois"));
  const auto& truth = scenario_.field.sources;

  auto zone_of = [&](const sim::RadSource& s) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rois.size(); ++i) {
      const double d = geo::point_in_region(rois[i], s.x, s.y) ? 0.0 : geo::point_ring_distance(rois[i].envelope, {s.x, s.y});
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(i);
      }
    }
    return best;
  };
  std::vector<int> zone(truth.size());
  std::vector<int> per_zone_inside(rois.size(), 0);
  for (std::size_t t = 0; t < truth.size(); ++t) {
    zone[t] = zone_of(truth[t]);
    if (zone[t] >= 0 && geo::point_in_region(rois[static_cast<std::size_t>(zone[t])], truth[t].x, truth[t].y))
      ++per_zone_inside[static_cast<std::size_t>(zone[t])];
  }

  auto errors_by_source = [](const json& score) {
    std::map<std::string, double> m;
    for (const auto& x : score.at("matches")) m[x.at("source").get<std::string>()] = x.at("error").get<double>();
    return m;
  };
  std::map<std::string, std::string> reasons;
  for (const auto& x : loc.at("score").at("misses")) reasons[x.at("source").get<std::string>()] = x.at("reason").get<std::string>();
  const auto ugv = errors_by_source(loc.at("score"));
  const auto uas = errors_by_source(loc.at("aerial_score"));

  json rows = json::array();
  for (std::size_t t = 0; t < truth.size(); ++t) {
    const auto& s = truth[t];
    json row{{"source", s.id}, {"zone", zone[t] >= 0 ? json(zone[t] + 1) : json(nullptr)}, {"isotope", sim::to_string(s.isotope)},
             {"activity_mbq", s.activity_mbq}};
    row["error_ugv"] = ugv.count(s.id) ? json(ugv.at(s.id)) : json(nullptr);
    const bool sole = zone[t] >= 0 && per_zone_inside[static_cast<std::size_t>(zone[t])] == 1 &&
                      geo::point_in_region(rois[static_cast<std::size_t>(zone[t])], s.x, s.y);
    if (sole && uas.count(s.id)) row["error_uas"] = uas.at(s.id);
    else if (zone[t] >= 0 && per_zone_inside[static_cast<std::size_t>(zone[t])] > 1) row["error_uas"] = "N-q";
    else row["error_uas"] = nullptr;
    row["comment"] = reasons.count(s.id) ? reasons.at(s.id) : "--";
    rows.push_back(row);
  }
  json out{{"sources", rows},
           {"mean_error_ugv", loc.at("score").at("mean_error")},
           {"false_alarms", loc.at("score").at("false_alarms")},
           {"estimates", loc.at("estimates")},
           {"config_hash", loc.at("config_hash")}};
  if (loc.at("spectral").contains("stripping_coefficient")) out["stripping_coefficient"] = loc.at("spectral").at("stripping_coefficient");
  return out;
}

std::string Mission::report_table() const {
  const json r = report();
  auto cell = [](const json& v) -> std::string {
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    return fmt::format("{:.3f}", v.get<double>());
  };
  std::string out = fmt::format("{:<8}{:<6}{:>12}{:>12}  {:<8}{:>10}  {}\n", "Source", "Zone", "Error UGV[m]", "Error UAS[m]",
                                "Isotope", "MBq", "Comment");
  for (const auto& row : r.at("sources")) {
    out += fmt::format("{:<8}{:<6}{:>12}{:>12}  {:<8}{:>10.2f}  {}\n", cell(row.at("source")), cell(row.at("zone")),
                       row.at("error_ugv").is_null() ? "--" : cell(row.at("error_ugv")), cell(row.at("error_uas")),
                       cell(row.at("isotope")), row.at("activity_mbq").get<double>(), cell(row.at("comment")));
  }
  out += fmt::format("mean UGV error: {:.3f} m over {} matched sources\n", r.at("mean_error_ugv").get<double>(),
                     std::count_if(r.at("sources").begin(), r.at("sources").end(),
                                   [](const json& row) { return !row.at("error_ugv").is_null(); }));
  if (r.contains("stripping_coefficient"))
    out += fmt::format("stripping coefficient: {:.3f}\n", r.at("stripping_coefficient").get<double>());
  return out;
}

}  // namespace radsurvey::mission

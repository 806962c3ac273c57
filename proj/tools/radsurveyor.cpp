#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "radsurvey/error.hpp"
#include "radsurvey/geo/io.hpp"
#include "radsurvey/mission/mission.hpp"
#include "radsurvey/mission/service.hpp"

namespace {

using radsurvey::mission::Mission;
namespace geo = radsurvey::geo;

constexpr int kExitError = 2;
constexpr int kExitPending = 3;

int report_outcome(const radsurvey::mission::RunOutcome& out) {
  if (out.pending) {
    fmt::print("pending: {}\n", out.message);
    return kExitPending;
  }
  fmt::print("{} (stage {})\n", out.message.empty() ? "done" : out.message, radsurvey::mission::to_string(out.stage));
  return 0;
}

void apply_overrides(Mission& m, const std::string& config, std::optional<std::uint64_t> seed) {
  if (config.empty() && !seed) return;
  nlohmann::json j = config.empty() ? radsurvey::mission::config_to_json(m.config()) : geo::read_json_file(config);
  if (seed) j["seed"] = *seed;
  m.set_config(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-robot radiation survey pipeline"};
  app.require_subcommand(1);

  std::string mission_dir = ".";
  std::string config;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  bool force = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--mission-dir", mission_dir, "Mission directory")->capture_default_str();
    sub->add_option("--config", config, "Mission config JSON (replaces config.json)");
    sub->add_option("--seed", seed, "Survey seed");
  };

  auto* cmd_new = app.add_subcommand("new", "Create a mission directory from a scenario");
  add_common(cmd_new);
  cmd_new->add_option("--scenario", scenario, "Scenario JSON")->required();

  std::string stage_name;
  auto* cmd_run = app.add_subcommand("run", "Run one stage");
  add_common(cmd_run);
  cmd_run->add_option("stage", stage_name, "Stage name, e.g. TerrainReady")->required();
  cmd_run->add_flag("--force", force, "Accept upstream artifacts made under another config");

  auto* cmd_all = app.add_subcommand("run-all", "Run every remaining stage");
  add_common(cmd_all);
  cmd_all->add_flag("--force", force, "Accept upstream artifacts made under another config");

  std::string bind = "127.0.0.1:8080";
  auto* cmd_serve = app.add_subcommand("serve", "Serve the HTTP API");
  cmd_serve->add_option("--mission-dir", mission_dir, "Mission directory")->capture_default_str();
  cmd_serve->add_option("--bind", bind, "host:port")->capture_default_str();

  bool as_json = false;
  auto* cmd_report = app.add_subcommand("report", "Print the localization report");
  cmd_report->add_option("--mission-dir", mission_dir, "Mission directory")->capture_default_str();
  cmd_report->add_flag("--json", as_json, "Print JSON instead of the table");

  std::string input_name;
  std::string input_file;
  auto* cmd_op = app.add_subcommand("operator", "Record an operator input from a JSON file");
  cmd_op->add_option("--mission-dir", mission_dir, "Mission directory")->capture_default_str();
  cmd_op->add_option("input", input_name, "obstacles | unload-points | sweep-dir | roi-margin | validate-obstacles")
      ->required();
  cmd_op->add_option("--file", input_file, "Input JSON (same schema as the HTTP body)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_new) {
      const auto sc = geo::read_json_file(scenario);
      std::optional<nlohmann::json> cfg;
      if (!config.empty()) cfg = geo::read_json_file(config);
      Mission m = Mission::create(mission_dir, sc, cfg, seed);
      fmt::print("created mission in {} (version {})\n", mission_dir, m.state().version);
      return 0;
    }
    if (*cmd_run) {
      Mission m = Mission::open(mission_dir);
      apply_overrides(m, config, seed);
      return report_outcome(m.run_stage(radsurvey::mission::stage_from_string(stage_name), force));
    }
    if (*cmd_all) {
      Mission m = Mission::open(mission_dir);
      apply_overrides(m, config, seed);
      return report_outcome(m.run_all(force));
    }
    if (*cmd_serve) {
      radsurvey::mission::serve(mission_dir, bind);
      return 0;
    }
    if (*cmd_report) {
      Mission m = Mission::open(mission_dir);
      if (as_json) fmt::print("{}\n", m.report().dump(2));
      else fmt::print("{}", m.report_table());
      return 0;
    }
    if (*cmd_op) {
      Mission m = Mission::open(mission_dir);
      const nlohmann::json body = input_file.empty() ? nlohmann::json::object() : geo::read_json_file(input_file);
      namespace ms = radsurvey::mission;
      if (input_name == ms::kManualObstacles) {
        m.set_manual_obstacles(geo::polygons_from_json(body.at("polygons")));
      } else if (input_name == ms::kUnloadPoints) {
        std::vector<geo::Point2> pts;
        for (const auto& p : body.at("points")) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        m.set_unload_points(pts);
      } else if (input_name == ms::kSweepDir) {
        const auto& d = body.at("sweep_dir_deg");
        m.set_sweep_dir(d.is_null() ? std::nullopt : std::optional<double>(d.get<double>()));
      } else if (input_name == ms::kRoiMargin) {
        m.set_roi_margin(body.at("margin").get<double>());
      } else if (input_name == ms::kValidateObstacles) {
        m.validate_obstacles();
      } else {
        fmt::print(stderr, "error: unknown operator input '{}'\n", input_name);
        return kExitError;
      }
      fmt::print("recorded {} (version {}, stage {})\n", input_name, m.state().version, ms::to_string(m.state().stage));
      return 0;
    }
  } catch (const radsurvey::Error& e) {
    fmt::print(stderr, "error: {}: {}\n", radsurvey::to_string(e.code()), e.what());
    return kExitError;
  } catch (const nlohmann::json::exception& e) {
    fmt::print(stderr, "error: Config: {}\n", e.what());
    return kExitError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitError;
  }
  return 0;
}

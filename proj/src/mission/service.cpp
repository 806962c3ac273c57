#include "radsurvey/mission/service.hpp"

#include <mutex>
#include <shared_mutex>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "radsurvey/error.hpp"
#include "radsurvey/geo/io.hpp"
#include "radsurvey/mission/mission.hpp"

// After Eigen: <resolv.h>, pulled in by httplib, defines a `_res` macro.
#include <httplib.h>

namespace radsurvey::mission {

using nlohmann::json;

namespace {

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Conflict: return 409;
    case ErrorCode::Sequencing:
    case ErrorCode::StaleConfig: return 422;
    case ErrorCode::Config:
    case ErrorCode::Validity:
    case ErrorCode::Domain:
    case ErrorCode::Geometry: return 400;
    default: return 500;
  }
}

json pending_inputs(const Mission& m) {
  json p = json::object();
  for (const char* name : {kManualObstacles, kUnloadPoints, kSweepDir, kValidateObstacles, kRoiMargin}) {
    const auto v = m.operator_input(name);
    p[name] = v ? *v : json(nullptr);
  }
  return p;
}

json state_body(const Mission& m) {
  json j = state_to_json(m.state());
  j["operator"] = pending_inputs(m);
  return j;
}

}  // namespace

struct Service::Impl {
  explicit Impl(const std::filesystem::path& dir) : mission(Mission::open(dir)) {}

  Mission mission;
  std::shared_mutex mu;
  httplib::Server server;

  void reply(httplib::Response& res, int status, json body) {
    body["version"] = mission.state().version;
    res.status = status;
    res.set_header("X-State-Version", std::to_string(mission.state().version));
    res.set_content(body.dump(), "application/json");
  }

  void reply_error(httplib::Response& res, ErrorCode code, const std::string& message) {
    reply(res, status_for(code), {{"code", std::string(to_string(code))}, {"message", message}});
  }

  // Runs `fn` under the exclusive lock after parsing the body and checking
  // that it carries the current version.
  template <typename Fn>
  void mutate(const httplib::Request& req, httplib::Response& res, Fn fn) {
    std::unique_lock lock(mu);
    json body;
    try {
      body = req.body.empty() ? json::object() : json::parse(req.body);
    } catch (const json::exception& e) {
      return reply_error(res, ErrorCode::Config, std::string("request body is not JSON: ") + e.what());
    }
    if (!body.is_object() || !body.contains("version") || !body.at("version").is_number_unsigned())
      return reply_error(res, ErrorCode::Config, "mutating requests must carry the state version");
    const auto version = body.at("version").get<std::uint64_t>();
    try {
      if (version != mission.state().version)
        fail(ErrorCode::Conflict, fmt::format("state version is {}, request was made against {}", mission.state().version, version));
      int status = 200;
      json out = fn(body, version, status);
      reply(res, status, std::move(out));
    } catch (const Error& e) {
      reply_error(res, e.code(), e.what());
    } catch (const json::exception& e) {
      reply_error(res, ErrorCode::Config, std::string("malformed request: ") + e.what());
    }
  }

  template <typename Fn>
  void read(httplib::Response& res, Fn fn) {
    std::shared_lock lock(mu);
    try {
      reply(res, 200, fn());
    } catch (const Error& e) {
      reply_error(res, e.code(), e.what());
    }
  }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Expose-Headers", "X-State-Version"}});
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Get("/state", [this](const httplib::Request&, httplib::Response& res) {
      read(res, [&] { return state_body(mission); });
    });
    server.Get("/artifact/:stage", [this](const httplib::Request& req, httplib::Response& res) {
      read(res, [&] {
        const Stage s = stage_from_string(req.path_params.at("stage"));
        return json{{"stage", to_string(s)}, {"artifact", mission.artifact_json(s)}};
      });
    });
    server.Get("/report", [this](const httplib::Request&, httplib::Response& res) {
      read(res, [&] { return json{{"report", mission.report()}, {"table", mission.report_table()}}; });
    });

    server.Post("/operator/obstacles", [this](const httplib::Request& req, httplib::Response& res) {
      mutate(req, res, [&](const json& b, std::uint64_t v, int&) {
        mission.set_manual_obstacles(geo::polygons_from_json(b.at("polygons")), v);
        return state_body(mission);
      });
    });
    server.Post("/operator/unload-points", [this](const httplib::Request& req, httplib::Response& res) {
      mutate(req, res, [&](const json& b, std::uint64_t v, int&) {
        std::vector<geo::Point2> pts;
        for (const auto& p : b.at("points")) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        mission.set_unload_points(pts, v);
        return state_body(mission);
      });
    });
    server.Post("/operator/sweep-dir", [this](const httplib::Request& req, httplib::Response& res) {
      mutate(req, res, [&](const json& b, std::uint64_t v, int&) {
        const json& d = b.at("sweep_dir_deg");
        mission.set_sweep_dir(d.is_null() ? std::nullopt : std::optional<double>(d.get<double>()), v);
        return state_body(mission);
      });
    });
    server.Post("/operator/roi-margin", [this](const httplib::Request& req, httplib::Response& res) {
      mutate(req, res, [&](const json& b, std::uint64_t v, int&) {
        mission.set_roi_margin(b.at("margin").get<double>(), v);
        return state_body(mission);
      });
    });
    server.Post("/operator/validate-obstacles", [this](const httplib::Request& req, httplib::Response& res) {
      mutate(req, res, [&](const json&, std::uint64_t v, int&) {
        mission.validate_obstacles(v);
        return state_body(mission);
      });
    });
    server.Post("/advance/:stage", [this](const httplib::Request& req, httplib::Response& res) {
      mutate(req, res, [&](const json& b, std::uint64_t, int& status) {
        const Stage s = stage_from_string(req.path_params.at("stage"));
        const RunOutcome out = mission.run_stage(s, b.value("force", false));
        json body = state_body(mission);
        body["message"] = out.message;
        body["pending"] = out.pending;
        if (out.pending) {
          body["pending_input"] = out.pending_input;
          status = 202;
        }
        return body;
      });
    });
  }
};

Service::Service(const std::filesystem::path& mission_dir) : impl_(std::make_unique<Impl>(mission_dir)) { impl_->routes(); }

Service::~Service() = default;

int Service::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = impl_->server.bind_to_any_port(host);
    if (p < 0) fail(ErrorCode::Io, "cannot bind " + host);
    return p;
  }
  if (!impl_->server.bind_to_port(host, port)) fail(ErrorCode::Io, fmt::format("cannot bind {}:{} (port busy?)", host, port));
  return port;
}

void Service::listen() { impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

void serve(const std::filesystem::path& mission_dir, const std::string& bind_address) {
  std::string host = "127.0.0.1";
  std::string port_text = bind_address;
  if (const auto colon = bind_address.rfind(':'); colon != std::string::npos) {
    host = bind_address.substr(0, colon);
    port_text = bind_address.substr(colon + 1);
  }
  int port = 0;
  try {
    port = std::stoi(port_text);
  } catch (const std::exception&) {
    fail(ErrorCode::Config, "bind address must be host:port");
  }
  Service svc(mission_dir);
  const int bound = svc.bind(host, port);
  fmt::print("serving {} on http://{}:{}\n", mission_dir.string(), host, bound);
  std::fflush(stdout);
  svc.listen();
}

}  // namespace radsurvey::mission

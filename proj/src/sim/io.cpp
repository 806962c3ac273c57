#include "radsurvey/sim/io.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include <fmt/format.h>

#include "radsurvey/error.hpp"

namespace radsurvey::sim {

std::string measurements_to_csv(const std::vector<Measurement>& ms) {
  const bool windows = !ms.empty() && std::all_of(ms.begin(), ms.end(), [](const Measurement& m) {
    return m.windows.has_value();
  });
  std::string out = windows ? "t,x,y,z_agl,counts,dose_rate,w_cs,w_co\n" : "t,x,y,z_agl,counts,dose_rate\n";
  for (const auto& m : ms) {
    // Shortest round-trip representation keeps files byte-stable and exact.
    out += fmt::format("{},{},{},{},{},{}", m.t, m.x, m.y, m.z_agl, m.counts, m.dose_rate);
    if (windows) out += fmt::format(",{},{}", m.windows->cs, m.windows->co);
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r' && ch != ' ') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    fail(ErrorCode::Io, fmt::format("measurement CSV line {}: bad number '{}'", line_no, s));
  return v;
}

}  // namespace

std::vector<Measurement> measurements_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  // Leading '#' lines carry metadata (e.g. the producing config hash).
  do {
    if (!std::getline(in, line)) fail(ErrorCode::Io, "measurement CSV is empty");
    ++line_no;
  } while (!line.empty() && line[0] == '#');
  const auto header = split(line);
  const std::vector<std::string> base{"t", "x", "y", "z_agl", "counts", "dose_rate"};
  if (header.size() < base.size() || !std::equal(base.begin(), base.end(), header.begin()))
    fail(ErrorCode::Io, "measurement CSV header must start with t,x,y,z_agl,counts,dose_rate");
  const bool windows = header.size() == 8 && header[6] == "w_cs" && header[7] == "w_co";
  if (header.size() != base.size() && !windows) fail(ErrorCode::Io, "unexpected measurement CSV columns");

  std::vector<Measurement> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split(line);
    if (f.size() != header.size()) fail(ErrorCode::Io, fmt::format("measurement CSV line {}: wrong field count", line_no));
    Measurement m;
    m.t = parse_double(f[0], line_no);
    m.x = parse_double(f[1], line_no);
    m.y = parse_double(f[2], line_no);
    m.z_agl = parse_double(f[3], line_no);
    m.counts = parse_double(f[4], line_no);
    m.dose_rate = parse_double(f[5], line_no);
    if (windows) m.windows = WindowCounts{parse_double(f[6], line_no), parse_double(f[7], line_no)};
    if (m.counts < 0.0 || !(m.z_agl > 0.0))
      fail(ErrorCode::Data, fmt::format("measurement CSV line {}: counts < 0 or z_agl <= 0", line_no));
    out.push_back(m);
  }
  return out;
}

nlohmann::json source_to_json(const RadSource& s) {
  return {{"id", s.id}, {"isotope", to_string(s.isotope)}, {"activity_mbq", s.activity_mbq},
          {"x", s.x},   {"y", s.y},                         {"emission", s.emission}};
}

RadSource source_from_json(const nlohmann::json& j, const Calibration& cal) {
  RadSource s = make_source(j.value("id", std::string{}), isotope_from_string(j.at("isotope").get<std::string>()),
                            j.at("activity_mbq").get<double>(), j.at("x").get<double>(), j.at("y").get<double>(), cal);
  if (j.contains("emission")) s.emission = j.at("emission").get<double>();
  return s;
}

Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  try {
    s.name = j.value("name", std::string("scenario"));
    s.terrain = terrain_spec_from_json(j.at("terrain"));
    s.seed = j.value("seed", std::uint64_t{1});
    if (j.contains("calibration")) {
      const auto& c = j.at("calibration");
      s.field.calibration.alpha_per_mbq_co60 = c.value("alpha_per_mbq_co60", s.field.calibration.alpha_per_mbq_co60);
      s.field.calibration.alpha_per_mbq_cs137 = c.value("alpha_per_mbq_cs137", s.field.calibration.alpha_per_mbq_cs137);
      s.field.calibration.dose_per_count = c.value("dose_per_count", s.field.calibration.dose_per_count);
    }
    if (j.contains("spectral")) {
      const auto& sp = j.at("spectral");
      auto& m = s.field.spectral;
      m.cs_window_fraction = sp.value("cs_window_fraction", m.cs_window_fraction);
      m.co_window_fraction = sp.value("co_window_fraction", m.co_window_fraction);
      m.co_leak = sp.value("co_leak", m.co_leak);
      m.background_cs = sp.value("background_cs", m.background_cs);
      m.background_co = sp.value("background_co", m.background_co);
    }
    s.field.background_rate = j.value("background_rate", s.field.background_rate);
    if (s.field.background_rate < 0.0) fail(ErrorCode::Config, "background_rate must be >= 0");
    for (const auto& src : j.value("sources", nlohmann::json::array()))
      s.field.sources.push_back(source_from_json(src, s.field.calibration));
    for (const auto& [key, value] : j.items()) {
      if (key != "name" && key != "terrain" && key != "seed" && key != "calibration" && key != "spectral" &&
          key != "background_rate" && key != "sources")
        s.extra[key] = value;
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Config, std::string("scenario: ") + e.what());
  }
  return s;
}

nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json sources = nlohmann::json::array();
  for (const auto& src : s.field.sources) sources.push_back(source_to_json(src));
  const auto& c = s.field.calibration;
  const auto& sp = s.field.spectral;
  nlohmann::json j{{"name", s.name},
                   {"terrain", terrain_spec_to_json(s.terrain)},
                   {"seed", s.seed},
                   {"background_rate", s.field.background_rate},
                   {"calibration",
                    {{"alpha_per_mbq_co60", c.alpha_per_mbq_co60},
                     {"alpha_per_mbq_cs137", c.alpha_per_mbq_cs137},
                     {"dose_per_count", c.dose_per_count}}},
                   {"spectral",
                    {{"cs_window_fraction", sp.cs_window_fraction},
                     {"co_window_fraction", sp.co_window_fraction},
                     {"co_leak", sp.co_leak},
                     {"background_cs", sp.background_cs},
                     {"background_co", sp.background_co}}},
                   {"sources", sources}};
  for (const auto& [key, value] : s.extra.items()) j[key] = value;
  return j;
}

}  // namespace radsurvey::sim

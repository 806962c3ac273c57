#include "radsurvey/geo/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "radsurvey/error.hpp"

namespace radsurvey::geo {

json geometry_to_json(const GridGeometry& g) {
  return json{{"origin_x", g.origin_x}, {"origin_y", g.origin_y}, {"cell_size", g.cell_size},
              {"rows", g.rows},         {"cols", g.cols}};
}

GridGeometry geometry_from_json(const json& j) {
  try {
    GridGeometry g;
    g.origin_x = j.at("origin_x").get<double>();
    g.origin_y = j.at("origin_y").get<double>();
    g.cell_size = j.at("cell_size").get<double>();
    g.rows = j.at("rows").get<int>();
    g.cols = j.at("cols").get<int>();
    g.validate();
    return g;
  } catch (const json::exception& e) {
    fail(ErrorCode::Io, std::string("grid header: ") + e.what());
  }
}

json dem_to_json(const Dem& dem) {
  json j = geometry_to_json(dem.geometry());
  j["heights"] = dem.heights();
  return j;
}

Dem dem_from_json(const json& j) {
  const GridGeometry g = geometry_from_json(j);
  try {
    return Dem(g, j.at("heights").get<std::vector<double>>());
  } catch (const json::exception& e) {
    fail(ErrorCode::Io, std::string("DEM heights: ") + e.what());
  }
}

Dem dem_from_ascii_grid(const std::string& text) {
  std::istringstream in(text);
  std::map<std::string, double> header;
  std::string key;
  // Header lines are "key value"; the first numeric token starts the data.
  while (in >> std::ws && in.peek() != EOF && std::isalpha(in.peek())) {
    double value = 0.0;
    in >> key >> value;
    if (!in) fail(ErrorCode::Io, "ASCII grid: malformed header near '" + key + "'");
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
    header[key] = value;
  }
  auto need = [&](const std::string& k) {
    auto it = header.find(k);
    if (it == header.end()) fail(ErrorCode::Io, "ASCII grid: missing " + k);
    return it->second;
  };
  GridGeometry g;
  g.cols = static_cast<int>(need("ncols"));
  g.rows = static_cast<int>(need("nrows"));
  g.cell_size = need("cellsize");
  if (header.count("xllcenter")) {
    g.origin_x = header["xllcenter"] - 0.5 * g.cell_size;
    g.origin_y = need("yllcenter") - 0.5 * g.cell_size;
  } else {
    g.origin_x = need("xllcorner");
    g.origin_y = need("yllcorner");
  }
  g.validate();
  std::vector<double> heights(g.size());
  for (int r = g.rows - 1; r >= 0; --r) {
    for (int c = 0; c < g.cols; ++c) {
      double v = 0.0;
      if (!(in >> v)) fail(ErrorCode::Io, "ASCII grid: too few values");
      heights[g.index(r, c)] = v;
    }
  }
  if (header.count("nodata_value")) {
    const double nd = header["nodata_value"];
    if (std::any_of(heights.begin(), heights.end(), [nd](double h) { return h == nd; }))
      fail(ErrorCode::Config, "ASCII grid: DEM contains no-data cells");
  }
  return Dem(g, std::move(heights));
}

Dem load_dem(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return dem_from_json(json::parse(text));
    } catch (const json::parse_error& e) {
      fail(ErrorCode::Io, path.string() + ": " + e.what());
    }
  }
  return dem_from_ascii_grid(text);
}

json ring_to_json(const Ring& ring) {
  json arr = json::array();
  for (const auto& p : ring) arr.push_back({p.x, p.y});
  return arr;
}

Ring ring_from_json(const json& j) {
  Ring ring;
  try {
    for (const auto& p : j) ring.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  } catch (const json::exception& e) {
    fail(ErrorCode::Io, std::string("ring: ") + e.what());
  }
  // Drop an explicit closing vertex.
  if (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
  return ring;
}

json polygon_to_json(const RegionPolygon& p) {
  json holes = json::array();
  for (const auto& h : p.holes) holes.push_back(ring_to_json(h));
  return json{{"envelope", ring_to_json(p.envelope)}, {"holes", holes}};
}

RegionPolygon polygon_from_json(const json& j) {
  if (!j.is_object() || !j.contains("envelope")) fail(ErrorCode::Io, "polygon: missing envelope");
  RegionPolygon p;
  p.envelope = ring_from_json(j.at("envelope"));
  if (j.contains("holes"))
    for (const auto& h : j.at("holes")) p.holes.push_back(ring_from_json(h));
  return p;
}

std::vector<RegionPolygon> polygons_from_json(const json& j) {
  std::vector<RegionPolygon> out;
  if (j.is_array()) {
    for (const auto& p : j) out.push_back(polygon_from_json(p));
  } else if (j.is_object() && j.contains("polygons")) {
    for (const auto& p : j.at("polygons")) out.push_back(polygon_from_json(p));
  } else {
    out.push_back(polygon_from_json(j));
  }
  return out;
}

json binary_grid_to_json(const BinaryGrid& grid) {
  const auto& g = grid.geometry;
  json j = geometry_to_json(g);
  json rows = json::array();
  for (int r = 0; r < g.rows; ++r) {
    json runs = json::array();
    bool current = false;
    int run = 0;
    for (int c = 0; c < g.cols; ++c) {
      const bool v = grid.at(r, c);
      if (v == current) {
        ++run;
      } else {
        runs.push_back(run);
        current = v;
        run = 1;
      }
    }
    runs.push_back(run);
    rows.push_back(std::move(runs));
  }
  j["rle"] = std::move(rows);
  return j;
}

BinaryGrid binary_grid_from_json(const json& j) {
  BinaryGrid grid(geometry_from_json(j));
  const auto& g = grid.geometry;
  const json& rows = j.at("rle");
  if (rows.size() != static_cast<std::size_t>(g.rows)) fail(ErrorCode::Io, "binary grid: row count mismatch");
  for (int r = 0; r < g.rows; ++r) {
    int c = 0;
    bool value = false;
    for (const auto& run_j : rows[static_cast<std::size_t>(r)]) {
      const int run = run_j.get<int>();
      if (run < 0 || c + run > g.cols) fail(ErrorCode::Io, "binary grid: run overflows row");
      for (int k = 0; k < run; ++k) grid.set(r, c++, value);
      value = !value;
    }
    if (c != g.cols) fail(ErrorCode::Io, "binary grid: row " + std::to_string(r) + " has wrong length");
  }
  return grid;
}

json grid_map_to_json(const GridMap& grid) {
  json j = geometry_to_json(grid.geometry);
  j["no_data"] = kNoDataSentinel;
  std::vector<double> values(grid.values.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = grid.no_data[i] ? kNoDataSentinel : grid.values[i];
  j["values"] = std::move(values);
  return j;
}

GridMap grid_map_from_json(const json& j) {
  GridMap grid(geometry_from_json(j));
  const double sentinel = j.value("no_data", kNoDataSentinel);
  const auto values = j.at("values").get<std::vector<double>>();
  if (values.size() != grid.geometry.size()) fail(ErrorCode::Io, "grid map: value count mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    grid.no_data[i] = values[i] == sentinel ? 1 : 0;
    grid.values[i] = grid.no_data[i] ? 0.0 : values[i];
  }
  return grid;
}

json trajectory_to_json(const Trajectory& t) {
  json wps = json::array();
  for (const auto& w : t.waypoints) wps.push_back({w.x, w.y, w.z});
  return json{{"speed", t.speed}, {"sampling_period", t.sampling_period}, {"waypoints", std::move(wps)}};
}

Trajectory trajectory_from_json(const json& j) {
  Trajectory t;
  try {
    t.speed = j.at("speed").get<double>();
    t.sampling_period = j.at("sampling_period").get<double>();
    for (const auto& w : j.at("waypoints"))
      t.waypoints.push_back({w.at(0).get<double>(), w.at(1).get<double>(), w.size() > 2 ? w.at(2).get<double>() : 0.0});
  } catch (const json::exception& e) {
    fail(ErrorCode::Io, std::string("trajectory: ") + e.what());
  }
  t.validate();
  return t;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Io, path.string() + ": " + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) fail(ErrorCode::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::Io, "rename to " + path.string() + " failed: " + ec.message());
}

void write_json_file(const std::filesystem::path& path, const json& j) { write_file_atomic(path, j.dump(1) + "\n"); }

}  // namespace radsurvey::geo

#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "radsurvey/geo/types.hpp"
#include "radsurvey/sim/field.hpp"

namespace radsurvey::gridding {

/// Sums counts of n consecutive measurements into one at their mean
/// position, mean height and mean time; a trailing group of < n is dropped.
/// Window counts are summed when every member carries them; the dose rate is
/// the group mean.
std::vector<sim::Measurement> downsample_by_summing(const std::vector<sim::Measurement>& ms, int n);

/// Delaunay interpolation of the counts onto a grid with the given cell size
/// covering the measurement bounding box.
geo::GridMap interpolate_grid(const std::vector<sim::Measurement>& ms, double cell_size);
/// Same, onto a caller-chosen grid geometry, interpolating `values`.
geo::GridMap interpolate_values(const std::vector<geo::Point2>& pts, const std::vector<double>& values,
                                const geo::GridGeometry& g);

struct ThresholdResult {
  double t_bg = 0.0;
  double t_hot = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  double mu_bg = 0.0;
  double sigma_bg = 0.0;
};

/// t_bg = mu + sigma / 2 over all values; t_hot = mu_bg + 3 sigma_bg over the
/// values <= t_bg. Population standard deviations.
ThresholdResult adaptive_thresholds(const std::vector<double>& values);

/// Removes the least important vertex (angle between the incoming and
/// outgoing edge vectors times their lengths; ties to the lowest position)
/// one at a time until at most max_vertices remain.
geo::Ring simplify_polygon(const geo::Ring& ring, int max_vertices);

struct Hotspot {
  geo::Ring contour;
  int enclosed_samples = 0;
  double peak_value = 0.0;
  geo::RegionPolygon polygon;
};

struct HotspotConfig {
  int min_samples = 4;
  double erode_radius = 1.5;  // m
  double dilate_radius = 0.0; // m
  int max_vertices = 7;
};

/// Number of measurements within the ring (boundary inclusive).
int count_inside(const geo::Ring& ring, const std::vector<sim::Measurement>& ms);

std::vector<Hotspot> extract_hotspots(const geo::GridMap& grid, const ThresholdResult& thr,
                                      const std::vector<sim::Measurement>& raw, const HotspotConfig& cfg);

nlohmann::json thresholds_to_json(const ThresholdResult& t);
nlohmann::json hotspots_to_json(const std::vector<Hotspot>& hs);
std::vector<Hotspot> hotspots_from_json(const nlohmann::json& j);

}  // namespace radsurvey::gridding

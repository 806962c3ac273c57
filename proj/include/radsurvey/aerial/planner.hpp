#pragma once

#include <vector>

#include "radsurvey/geo/types.hpp"

namespace radsurvey::aerial {

/// Distance from the detector to a source lying midway between two strips.
double worst_case_distance(double strip_spacing, double height);

enum class AltitudeMode { FixedMsl, Agl };

struct StripPlanConfig {
  geo::RegionPolygon area;
  double strip_spacing = 10.0;  // A, m
  double heading = 0.0;         // strip direction, radians from +x
  double speed = 2.0;           // m/s
  double sampling_period = 1.0; // s
  AltitudeMode altitude_mode = AltitudeMode::Agl;
  double altitude = 15.0;       // MSL z for FixedMsl, AGL h otherwise
};

/// Serpentine lawnmower over the area's extent measured perpendicular to the
/// heading: floor(width / A) + 1 lines, the first inset A/2 from the edge
/// (a single centered line when width < A; a last line past the far edge is
/// moved onto it). Waypoint z is the configured
/// altitude for FixedMsl and 0 otherwise.
geo::Trajectory plan_strips(const StripPlanConfig& cfg);

struct TerrainFollowConfig {
  double agl_height = 15.0;  // h, m
  double segment_size = 10.0;  // s, m
  int filter_window = 5;       // odd number of waypoints
  bool nearest_sampling = false;
};

/// Splits every leg into equal pieces no longer than s (corners kept), samples
/// the terrain under each waypoint, smooths the terrain-height sequence with a
/// centered moving average whose window shrinks symmetrically at the ends, and
/// sets z = smoothed height + h.
geo::Trajectory adjust_terrain_following(const geo::Trajectory& traj2d, const geo::Dem& dem,
                                         const TerrainFollowConfig& cfg);

struct AglSample {
  double arc_length = 0.0;
  double agl = 0.0;
};

struct AglProfile {
  std::vector<AglSample> samples;
  double rms_deviation = 0.0;  // about the target height
  double max_abs_deviation = 0.0;
};

/// AGL at each waypoint, or every `step` meters along the path when step > 0.
AglProfile agl_profile(const geo::Trajectory& traj3d, const geo::Dem& dem, double target_height, double step = 0.0);

}  // namespace radsurvey::aerial

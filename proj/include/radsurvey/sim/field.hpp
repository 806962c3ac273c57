#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "radsurvey/geo/types.hpp"

namespace radsurvey::sim {

enum class Isotope { Co60, Cs137 };

std::string to_string(Isotope iso);
Isotope isotope_from_string(const std::string& s);

/// Activity and dose calibration. The emission parameter alpha folds the
/// detector efficiency into a single per-isotope constant.
struct Calibration {
  double alpha_per_mbq_co60 = 100.0;   // counts*m^2/s per MBq
  double alpha_per_mbq_cs137 = 100.0;  // counts*m^2/s per MBq
  double dose_per_count = 0.07 / 30.0; // uGy/h per count/s
};

double emission_from_activity(Isotope iso, double activity_mbq, const Calibration& cal = {});
double dose_from_counts(double counts_per_s, const Calibration& cal = {});
double counts_from_dose(double dose_ugy_h, const Calibration& cal = {});

struct RadSource {
  std::string id;
  Isotope isotope = Isotope::Co60;
  double activity_mbq = 0.0;
  double x = 0.0;
  double y = 0.0;
  double emission = 0.0;  // counts*m^2/s
};

RadSource make_source(std::string id, Isotope iso, double activity_mbq, double x, double y, const Calibration& cal = {});

/// Two-window spectral abstraction: a fraction of each isotope's counts
/// lands in its own photopeak window; cobalt additionally leaks into the
/// caesium window in proportion to its own window counts.
struct SpectralModel {
  double cs_window_fraction = 0.35;
  double co_window_fraction = 0.15;
  double co_leak = 0.30;          // Cs-window counts per Co-window count from Co-60
  double background_cs = 3.0;     // counts/s in the Cs window from background
  double background_co = 1.5;     // counts/s in the Co window from background
};

struct RadiationField {
  std::vector<RadSource> sources;
  double background_rate = 30.0;  // counts/s
  Calibration calibration;
  SpectralModel spectral;
};

/// B + sum_r alpha_r / (d_r^2 + h^2). Throws Domain for z_agl <= 0.
double expected_intensity(const RadiationField& field, double x, double y, double z_agl);

struct WindowRates {
  double cs = 0.0;
  double co = 0.0;
};
WindowRates expected_window_rates(const RadiationField& field, double x, double y, double z_agl);

struct WindowCounts {
  double cs = 0.0;
  double co = 0.0;
};

struct Measurement {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z_agl = 1.0;
  double counts = 0.0;     // total counts in one integration
  double dose_rate = 0.0;  // uGy/h
  std::optional<WindowCounts> windows;
};

/// Poisson sampler with a platform-independent output sequence: bits come
/// from std::mt19937_64 (bit-exact by the standard) and the transforms are
/// implemented here. Inverse transform up to mean 1e4, normal approximation
/// above.
class PoissonSampler {
 public:
  explicit PoissonSampler(std::uint64_t seed) : engine_(seed) {}

  double uniform();  // [0, 1)
  double normal();
  std::uint64_t poisson(double mean);

 private:
  std::mt19937_64 engine_;
  std::vector<double> cdf_;
  std::optional<double> spare_normal_;
};

enum class HeightMode { Aerial, Ground };

struct SurveyOptions {
  HeightMode mode = HeightMode::Ground;
  double ground_height = 0.5;  // detector height for ground surveys, m
  bool record_windows = true;
  std::uint64_t seed = 1;
};

/// One measurement per sampling period, positioned at the middle of each
/// integration window along the trajectory traversed at its speed.
std::vector<Measurement> simulate_survey(const RadiationField& field, const geo::Dem& dem,
                                         const geo::Trajectory& traj, const SurveyOptions& opts);

}  // namespace radsurvey::sim

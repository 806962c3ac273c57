#include "radsurvey/sim/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "radsurvey/error.hpp"
#include "radsurvey/geo/geometry.hpp"
#include "radsurvey/kernels/inverse_square.hpp"

namespace radsurvey::sim {

std::string to_string(Isotope iso) { return iso == Isotope::Co60 ? "Co-60" : "Cs-137"; }

Isotope isotope_from_string(const std::string& s) {
  if (s == "Co-60" || s == "Co60" || s == "co60") return Isotope::Co60;
  if (s == "Cs-137" || s == "Cs137" || s == "cs137") return Isotope::Cs137;
  fail(ErrorCode::Config, "unknown isotope '" + s + "'");
}

double emission_from_activity(Isotope iso, double activity_mbq, const Calibration& cal) {
  if (!(activity_mbq > 0.0)) fail(ErrorCode::Domain, "activity must be positive");
  const double k = iso == Isotope::Co60 ? cal.alpha_per_mbq_co60 : cal.alpha_per_mbq_cs137;
  if (!(k > 0.0)) fail(ErrorCode::Domain, "calibration constant must be positive");
  return k * activity_mbq;
}

double dose_from_counts(double counts_per_s, const Calibration& cal) {
  if (counts_per_s < 0.0) fail(ErrorCode::Domain, "count rate must be non-negative");
  if (!(cal.dose_per_count > 0.0)) fail(ErrorCode::Domain, "dose_per_count must be positive");
  return counts_per_s * cal.dose_per_count;
}

double counts_from_dose(double dose_ugy_h, const Calibration& cal) {
  if (dose_ugy_h < 0.0) fail(ErrorCode::Domain, "dose rate must be non-negative");
  if (!(cal.dose_per_count > 0.0)) fail(ErrorCode::Domain, "dose_per_count must be positive");
  return dose_ugy_h / cal.dose_per_count;
}

RadSource make_source(std::string id, Isotope iso, double activity_mbq, double x, double y, const Calibration& cal) {
  return RadSource{std::move(id), iso, activity_mbq, x, y, emission_from_activity(iso, activity_mbq, cal)};
}

double expected_intensity(const RadiationField& field, double x, double y, double z_agl) {
  if (!(z_agl > 0.0)) fail(ErrorCode::Domain, "detector height above terrain must be positive");
  const double h2 = z_agl * z_agl;
  double sum = field.background_rate;
  for (const auto& s : field.sources) {
    const double dx = x - s.x;
    const double dy = y - s.y;
    sum += s.emission / (dx * dx + dy * dy + h2);
  }
  return sum;
}

WindowRates expected_window_rates(const RadiationField& field, double x, double y, double z_agl) {
  if (!(z_agl > 0.0)) fail(ErrorCode::Domain, "detector height above terrain must be positive");
  const double h2 = z_agl * z_agl;
  double cs = 0.0;
  double co = 0.0;
  for (const auto& s : field.sources) {
    const double dx = x - s.x;
    const double dy = y - s.y;
    const double e = s.emission / (dx * dx + dy * dy + h2);
    (s.isotope == Isotope::Cs137 ? cs : co) += e;
  }
  const auto& sp = field.spectral;
  const double co_window = sp.co_window_fraction * co;
  return {sp.background_cs + sp.cs_window_fraction * cs + sp.co_leak * co_window, sp.background_co + co_window};
}

double PoissonSampler::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double PoissonSampler::normal() {
  if (spare_normal_) {
    const double v = *spare_normal_;
    spare_normal_.reset();
    return v;
  }
  // Box-Muller; 1 - u keeps the logarithm finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(theta);
  return r * std::cos(theta);
}

std::uint64_t PoissonSampler::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) fail(ErrorCode::Domain, "Poisson mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  if (mean > 1e4) {
    const double v = std::round(mean + std::sqrt(mean) * normal());
    return v <= 0.0 ? 0 : static_cast<std::uint64_t>(v);
  }
  // Inverse transform over a window around the mode; mass outside the
  // window is below 1e-30 and is assigned to the window edges.
  const double sd = std::sqrt(mean);
  const auto mode = static_cast<std::int64_t>(std::floor(mean));
  const std::int64_t lo = std::max<std::int64_t>(0, mode - static_cast<std::int64_t>(12.0 * sd) - 12);
  const std::int64_t hi = mode + static_cast<std::int64_t>(12.0 * sd) + 12;
  cdf_.resize(static_cast<std::size_t>(hi - lo + 1));
  const double log_mean = std::log(mean);
  double acc = 0.0;
  for (std::int64_t k = lo; k <= hi; ++k) {
    acc += std::exp(-mean + static_cast<double>(k) * log_mean - std::lgamma(static_cast<double>(k) + 1.0));
    cdf_[static_cast<std::size_t>(k - lo)] = acc;
  }
  const double u = uniform() * acc;
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto offset = std::min<std::ptrdiff_t>(it - cdf_.begin(), static_cast<std::ptrdiff_t>(cdf_.size()) - 1);
  return static_cast<std::uint64_t>(lo + offset);
}

namespace {

// Position at arc length s (2D arc length; z interpolated linearly).
geo::Point3 point_at(const geo::Trajectory& traj, const std::vector<double>& cumulative, double s) {
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), s);
  std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - cumulative.begin(), 1)) - 1;
  i = std::min(i, traj.waypoints.size() - 2);
  const double seg = cumulative[i + 1] - cumulative[i];
  const double f = seg > 0.0 ? std::clamp((s - cumulative[i]) / seg, 0.0, 1.0) : 0.0;
  const auto& a = traj.waypoints[i];
  const auto& b = traj.waypoints[i + 1];
  return {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y), a.z + f * (b.z - a.z)};
}

}  // namespace

std::vector<Measurement> simulate_survey(const RadiationField& field, const geo::Dem& dem,
                                         const geo::Trajectory& traj, const SurveyOptions& opts) {
  traj.validate();
  const auto& g = dem.geometry();
  for (const auto& w : traj.waypoints)
    if (!g.contains(w.x, w.y)) fail(ErrorCode::Extent, "trajectory leaves the DEM extent");
  if (opts.mode == HeightMode::Ground && !(opts.ground_height > 0.0))
    fail(ErrorCode::Config, "ground detector height must be positive");

  std::vector<double> cumulative(traj.waypoints.size(), 0.0);
  for (std::size_t i = 1; i < traj.waypoints.size(); ++i)
    cumulative[i] = cumulative[i - 1] + geo::distance(traj.waypoints[i - 1].xy(), traj.waypoints[i].xy());
  const double step = traj.speed * traj.sampling_period;
  const auto n = static_cast<std::size_t>(std::floor(cumulative.back() / step + 1e-9));

  std::vector<Measurement> out(n);
  std::vector<double> xs(n), ys(n), h2(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = (static_cast<double>(k) + 0.5) * step;
    const geo::Point3 p = point_at(traj, cumulative, s);
    double agl = opts.ground_height;
    if (opts.mode == HeightMode::Aerial) {
      agl = p.z - geo::dem_sample(dem, p.x, p.y);
      if (!(agl > 0.0)) fail(ErrorCode::Domain, "aerial detector at or below terrain at t=" + std::to_string(s / traj.speed));
    }
    out[k].t = (static_cast<double>(k) + 0.5) * traj.sampling_period;
    out[k].x = p.x;
    out[k].y = p.y;
    out[k].z_agl = agl;
    xs[k] = p.x;
    ys[k] = p.y;
    h2[k] = agl * agl;
  }

  std::vector<kernels::SourceTerm> terms;
  for (const auto& s : field.sources) terms.push_back({s.emission, s.x, s.y});
  // Reference kernel: Poisson draws must not depend on the host ISA.
  std::vector<double> rate(n);
  kernels::scalar::inverse_square_sum({xs, ys, h2}, terms, rate);

  PoissonSampler rng(opts.seed);
  for (std::size_t k = 0; k < n; ++k) {
    const double lambda = (field.background_rate + rate[k]) * traj.sampling_period;
    auto& m = out[k];
    m.counts = static_cast<double>(rng.poisson(lambda));
    m.dose_rate = dose_from_counts(m.counts / traj.sampling_period, field.calibration);
    if (opts.record_windows) {
      const WindowRates w = expected_window_rates(field, m.x, m.y, m.z_agl);
      WindowCounts wc;
      wc.cs = static_cast<double>(rng.poisson(w.cs * traj.sampling_period));
      wc.co = static_cast<double>(rng.poisson(w.co * traj.sampling_period));
      m.windows = wc;
    }
  }
  return out;
}

}  // namespace radsurvey::sim

#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "radsurvey/geo/types.hpp"
#include "radsurvey/gridding/hotspots.hpp"
#include "radsurvey/sim/field.hpp"

namespace radsurvey::loc {

struct SourceEstimate {
  double alpha = 0.0;  // counts*m^2 per integration
  double x = 0.0;
  double y = 0.0;
};
using ParameterMatrix = std::vector<SourceEstimate>;

enum class ThresholdBasis { Measurements, GridCells };

struct PeakResult {
  int count = 0;
  std::vector<geo::Ring> contours;  // outer iso-contours at t_hot passing the validity rule
  std::vector<double> peak_values;  // highest grid value inside each contour
  gridding::ThresholdResult thresholds;
};

/// Adaptive thresholds (on the measurement counts, or on the valid grid
/// cells), iso-contours of the grid at t_hot, and the validity rule: a contour
/// counts when at least `min_samples` measurements lie inside it.
PeakResult count_peaks(const geo::GridMap& grid, const std::vector<sim::Measurement>& raw, int min_samples,
                       ThresholdBasis basis = ThresholdBasis::Measurements);

/// Centroid of each contour and alpha = (peak - mu_bg) * h^2.
ParameterMatrix init_parameters(const std::vector<geo::Ring>& contours, const std::vector<double>& peak_values,
                                double mu_bg, double h);
/// Peak values looked up from the grid cells inside each contour.
ParameterMatrix init_parameters(const std::vector<geo::Ring>& contours, const geo::GridMap& grid, double mu_bg, double h);

struct GaussNewtonOptions {
  double tol = 1e-8;
  int max_iter = 100;
  int max_halvings = 10;
  double background = 0.0;            // subtracted from every count
  bool fit_background = false;        // fit a constant offset as an extra parameter
  bool per_measurement_height = false;  // use z_agl of each sample instead of h
};

struct GaussNewtonReport {
  ParameterMatrix theta;
  double fitted_background = 0.0;
  int iterations = 0;                   // accepted steps
  std::vector<double> residual_history; // sum of squared residuals, initial first
  bool converged = false;
  int jacobian_rows = 0;
  int jacobian_cols = 0;
  int restarts_accepted = 0;  // multistart only
};

/// r_m = c_m - b - sum_r alpha_r / ((x_m - x_r)^2 + (y_m - y_r)^2 + h^2).
Eigen::VectorXd residuals(const ParameterMatrix& theta, const std::vector<sim::Measurement>& ms, double h,
                          double background = 0.0);
/// Analytic M x 3R Jacobian of the residuals, columns (alpha_r, x_r, y_r).
Eigen::MatrixXd jacobian(const ParameterMatrix& theta, const std::vector<sim::Measurement>& ms, double h);

/// Damped Gauss-Newton: theta <- theta - s (J^T J)^-1 J^T r, halving s while
/// the sum of squares would grow or an alpha would turn non-positive. Throws
/// RankDeficient for singular J^T J and Numeric for non-finite residuals.
GaussNewtonReport gauss_newton(const ParameterMatrix& theta0, const std::vector<sim::Measurement>& ms, double h,
                               const GaussNewtonOptions& opts = {});

/// Intensities (and the offset, when fitted) solved by linear least squares
/// with the positions held fixed. A non-positive solution keeps the input
/// alpha for that source.
ParameterMatrix refine_intensities(const ParameterMatrix& theta, const std::vector<sim::Measurement>& ms, double h,
                                   const GaussNewtonOptions& opts = {});

/// Gauss-Newton from theta0, then repeated restarts with one source moved by
/// `offset` along +x, -x, +y or -y (intensities re-solved first), keeping any
/// fit with a lower sum of squares until a full round brings no gain.
/// `offset` 0 is a single fit. Failed restarts are skipped.
GaussNewtonReport gauss_newton_multistart(const ParameterMatrix& theta0, const std::vector<sim::Measurement>& ms,
                                          double h, const GaussNewtonOptions& opts, double offset,
                                          int max_rounds = 5);

struct Match {
  int estimate = -1;
  int truth = -1;
  double distance = 0.0;
};

struct Miss {
  int truth = -1;
  std::string reason;
};

struct LocalizationScore {
  std::vector<Match> matches;
  std::vector<Miss> misses;
  std::vector<int> false_alarms;
  double mean_error() const;
};

/// One-to-one assignment maximizing the number of matches within max_match
/// and then minimizing the summed distance; exhaustive up to 6 estimates,
/// greedy by distance beyond. `miss_reason` labels unmatched truths.
LocalizationScore score(const ParameterMatrix& theta, const std::vector<sim::RadSource>& truth, double max_match,
                        const std::function<std::string(int)>& miss_reason = {});

struct WindowBackground {
  double cs = 0.0;
  double co = 0.0;
};

/// Least-squares slope (with intercept) of Cs-window net against Co-window
/// net counts. Throws Data without windows and Estimation when the Co window
/// barely exceeds Poisson scatter.
double estimate_stripping(const std::vector<sim::Measurement>& co_only, const WindowBackground& bg);

struct NetCounts {
  double cs = 0.0;
  double co = 0.0;
};

/// co = W_co - b_co; cs = W_cs - b_cs - k co; both clamped at 0.
std::vector<NetCounts> separate_isotopes(const std::vector<sim::Measurement>& ms, double k, const WindowBackground& bg);

nlohmann::json estimates_to_json(const ParameterMatrix& theta);
ParameterMatrix estimates_from_json(const nlohmann::json& j);
nlohmann::json report_to_json(const GaussNewtonReport& r);
nlohmann::json score_to_json(const LocalizationScore& s, const std::vector<sim::RadSource>& truth);

}  // namespace radsurvey::loc

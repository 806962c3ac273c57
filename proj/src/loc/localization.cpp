#include "radsurvey/loc/localization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "radsurvey/error.hpp"
#include "radsurvey/geo/geometry.hpp"
#include "radsurvey/geo/io.hpp"
#include "radsurvey/gridding/raster.hpp"
#include "radsurvey/kernels/inverse_square.hpp"

namespace radsurvey::loc {

PeakResult count_peaks(const geo::GridMap& grid, const std::vector<sim::Measurement>& raw, int min_samples,
                       ThresholdBasis basis) {
  std::vector<double> values;
  if (basis == ThresholdBasis::Measurements) {
    for (const auto& m : raw) values.push_back(m.counts);
  } else {
    for (std::size_t i = 0; i < grid.values.size(); ++i)
      if (!grid.no_data[i]) values.push_back(grid.values[i]);
  }
  PeakResult out;
  out.thresholds = gridding::adaptive_thresholds(values);
  const auto& g = grid.geometry;
  for (auto& ring : gridding::marching_squares(grid, out.thresholds.t_hot)) {
    if (geo::signed_area(ring) <= 0.0) continue;  // holes
    if (gridding::count_inside(ring, raw) < min_samples) continue;
    double peak = -std::numeric_limits<double>::infinity();
    const geo::BBox box = geo::bounding_box(ring);
    for (int r = 0; r < g.rows; ++r) {
      for (int c = 0; c < g.cols; ++c) {
        if (!grid.valid(r, c)) continue;
        const geo::Point2 p = g.center(r, c);
        if (p.x < box.min_x || p.x > box.max_x || p.y < box.min_y || p.y > box.max_y) continue;
        if (geo::point_in_ring(ring, p)) peak = std::max(peak, grid.at(r, c));
      }
    }
    out.peak_values.push_back(peak);
    out.contours.push_back(std::move(ring));
  }
  out.count = static_cast<int>(out.contours.size());
  return out;
}

ParameterMatrix init_parameters(const std::vector<geo::Ring>& contours, const std::vector<double>& peak_values,
                                double mu_bg, double h) {
  if (contours.size() != peak_values.size()) fail(ErrorCode::Config, "one peak value per contour required");
  if (!(h > 0.0)) fail(ErrorCode::Domain, "detector height must be positive");
  ParameterMatrix theta;
  for (std::size_t i = 0; i < contours.size(); ++i) {
    if (contours[i].size() < 3) fail(ErrorCode::Geometry, "empty contour");
    const geo::Point2 c = geo::ring_centroid(contours[i]);
    theta.push_back({(peak_values[i] - mu_bg) * h * h, c.x, c.y});
  }
  return theta;
}

ParameterMatrix init_parameters(const std::vector<geo::Ring>& contours, const geo::GridMap& grid, double mu_bg, double h) {
  std::vector<double> peaks;
  const auto& g = grid.geometry;
  for (const auto& ring : contours) {
    if (ring.size() < 3) fail(ErrorCode::Geometry, "empty contour");
    double peak = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < g.rows; ++r)
      for (int c = 0; c < g.cols; ++c)
        if (grid.valid(r, c) && geo::point_in_ring(ring, g.center(r, c))) peak = std::max(peak, grid.at(r, c));
    if (!std::isfinite(peak)) fail(ErrorCode::Geometry, "contour encloses no grid cell");
    peaks.push_back(peak);
  }
  return init_parameters(contours, peaks, mu_bg, h);
}

Eigen::VectorXd residuals(const ParameterMatrix& theta, const std::vector<sim::Measurement>& ms, double h,
                          double background) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(ms.size()));
  for (std::size_t m = 0; m < ms.size(); ++m) {
    double model = 0.0;
    for (const auto& s : theta) {
      const double dx = ms[m].x - s.x;
      const double dy = ms[m].y - s.y;
      model += s.alpha / (dx * dx + dy * dy + h * h);
    }
    r[static_cast<Eigen::Index>(m)] = ms[m].counts - background - model;
  }
  return r;
}

Eigen::MatrixXd jacobian(const ParameterMatrix& theta, const std::vector<sim::Measurement>& ms, double h) {
  Eigen::MatrixXd J(static_cast<Eigen::Index>(ms.size()), static_cast<Eigen::Index>(3 * theta.size()));
  for (std::size_t m = 0; m < ms.size(); ++m) {
    for (std::size_t r = 0; r < theta.size(); ++r) {
      const double dx = ms[m].x - theta[r].x;
      const double dy = ms[m].y - theta[r].y;
      const double D = dx * dx + dy * dy + h * h;
      const auto row = static_cast<Eigen::Index>(m);
      const auto col = static_cast<Eigen::Index>(3 * r);
      J(row, col) = -1.0 / D;
      J(row, col + 1) = -2.0 * theta[r].alpha * dx / (D * D);
      J(row, col + 2) = -2.0 * theta[r].alpha * dy / (D * D);
    }
  }
  return J;
}

namespace {

struct Problem {
  std::vector<double> x, y, h2, counts;
  bool fit_background = false;

  std::size_t size() const { return x.size(); }
  kernels::SampleView view() const { return {x, y, h2}; }
};

std::vector<kernels::SourceTerm> terms_of(const Eigen::VectorXd& p, std::size_t R) {
  std::vector<kernels::SourceTerm> t(R);
  for (std::size_t r = 0; r < R; ++r)
    t[r] = {p[static_cast<Eigen::Index>(3 * r)], p[static_cast<Eigen::Index>(3 * r + 1)],
            p[static_cast<Eigen::Index>(3 * r + 2)]};
  return t;
}

double sum_of_squares(const Problem& pb, const Eigen::VectorXd& p, std::size_t R) {
  std::vector<double> model(pb.size());
  const auto terms = terms_of(p, R);
  kernels::inverse_square_sum(pb.view(), terms, model);
  const double beta = pb.fit_background ? p[static_cast<Eigen::Index>(3 * R)] : 0.0;
  double sse = 0.0;
  for (std::size_t m = 0; m < pb.size(); ++m) {
    const double r = pb.counts[m] - beta - model[m];
    sse += r * r;
  }
  return sse;
}

// Normal equations including the optional background column (dr/dbeta = -1).
void normal_system(const Problem& pb, const Eigen::VectorXd& p, std::size_t R, Eigen::MatrixXd& A, Eigen::VectorXd& g) {
  const std::size_t P = 3 * R;
  const auto terms = terms_of(p, R);
  if (!pb.fit_background) {
    const auto ne = kernels::normal_equations(pb.view(), pb.counts, terms);
    A = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        ne.jtj.data(), static_cast<Eigen::Index>(P), static_cast<Eigen::Index>(P));
    g = Eigen::Map<const Eigen::VectorXd>(ne.jtr.data(), static_cast<Eigen::Index>(P));
    return;
  }
  const double beta = p[static_cast<Eigen::Index>(P)];
  Eigen::MatrixXd J(static_cast<Eigen::Index>(pb.size()), static_cast<Eigen::Index>(P + 1));
  Eigen::VectorXd r(static_cast<Eigen::Index>(pb.size()));
  for (std::size_t m = 0; m < pb.size(); ++m) {
    double model = 0.0;
    const auto row = static_cast<Eigen::Index>(m);
    for (std::size_t s = 0; s < R; ++s) {
      const double dx = pb.x[m] - terms[s].x;
      const double dy = pb.y[m] - terms[s].y;
      const double D = dx * dx + dy * dy + pb.h2[m];
      model += terms[s].alpha / D;
      J(row, static_cast<Eigen::Index>(3 * s)) = -1.0 / D;
      J(row, static_cast<Eigen::Index>(3 * s + 1)) = -2.0 * terms[s].alpha * dx / (D * D);
      J(row, static_cast<Eigen::Index>(3 * s + 2)) = -2.0 * terms[s].alpha * dy / (D * D);
    }
    J(row, static_cast<Eigen::Index>(P)) = -1.0;
    r[row] = pb.counts[m] - beta - model;
  }
  A = J.transpose() * J;
  g = J.transpose() * r;
}

}  // namespace

GaussNewtonReport gauss_newton(const ParameterMatrix& theta0, const std::vector<sim::Measurement>& ms, double h,
                               const GaussNewtonOptions& opts) {
  const std::size_t R = theta0.size();
  if (R == 0) fail(ErrorCode::Config, "at least one source is required");
  if (!opts.per_measurement_height && !(h > 0.0)) fail(ErrorCode::Domain, "detector height must be positive");
  const std::size_t P = 3 * R + (opts.fit_background ? 1 : 0);
  if (ms.size() < P) fail(ErrorCode::Estimation, "fewer measurements than parameters");
  for (const auto& s : theta0)
    if (!(s.alpha > 0.0)) fail(ErrorCode::Domain, "initial alpha must be positive");

  Problem pb;
  pb.fit_background = opts.fit_background;
  for (const auto& m : ms) {
    pb.x.push_back(m.x);
    pb.y.push_back(m.y);
    const double hm = opts.per_measurement_height ? m.z_agl : h;
    pb.h2.push_back(hm * hm);
    pb.counts.push_back(m.counts - opts.background);
  }

  Eigen::VectorXd p(static_cast<Eigen::Index>(P));
  for (std::size_t r = 0; r < R; ++r) {
    p[static_cast<Eigen::Index>(3 * r)] = theta0[r].alpha;
    p[static_cast<Eigen::Index>(3 * r + 1)] = theta0[r].x;
    p[static_cast<Eigen::Index>(3 * r + 2)] = theta0[r].y;
  }
  if (opts.fit_background) p[static_cast<Eigen::Index>(3 * R)] = 0.0;

  GaussNewtonReport rep;
  rep.jacobian_rows = static_cast<int>(ms.size());
  rep.jacobian_cols = static_cast<int>(P);
  double sse = sum_of_squares(pb, p, R);
  if (!std::isfinite(sse)) fail(ErrorCode::Numeric, "non-finite residual at the initial parameters");
  rep.residual_history.push_back(sse);

  auto alphas_positive = [&](const Eigen::VectorXd& q) {
    for (std::size_t r = 0; r < R; ++r)
      if (!(q[static_cast<Eigen::Index>(3 * r)] > 0.0)) return false;
    return true;
  };

  for (int it = 1; it <= opts.max_iter; ++it) {
    if (sse == 0.0) {
      rep.converged = true;
      break;
    }
    Eigen::MatrixXd A;
    Eigen::VectorXd g;
    normal_system(pb, p, R, A, g);
    if (!A.allFinite() || !g.allFinite()) fail(ErrorCode::Numeric, fmt::format("non-finite Jacobian at iteration {}", it));
    // Jacobi scaling puts alpha and position columns on equal footing.
    Eigen::VectorXd d(static_cast<Eigen::Index>(P));
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(P); ++i) {
      if (!(A(i, i) > 0.0)) fail(ErrorCode::RankDeficient, fmt::format("singular J^T J at iteration {}", it));
      d[i] = 1.0 / std::sqrt(A(i, i));
    }
    const Eigen::MatrixXd As = d.asDiagonal() * A * d.asDiagonal();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(As);
    lu.setThreshold(1e-12);
    if (lu.rank() < static_cast<Eigen::Index>(P))
      fail(ErrorCode::RankDeficient, fmt::format("singular J^T J at iteration {}", it));
    const Eigen::VectorXd delta = d.asDiagonal() * lu.solve(d.asDiagonal() * g);
    if (!delta.allFinite()) fail(ErrorCode::Numeric, fmt::format("non-finite step at iteration {}", it));

    double step = 1.0;
    bool accepted = false;
    double sse_new = sse;
    Eigen::VectorXd candidate;
    for (int k = 0; k <= opts.max_halvings; ++k, step *= 0.5) {
      candidate = p - step * delta;
      if (!alphas_positive(candidate)) continue;
      sse_new = sum_of_squares(pb, candidate, R);
      if (!std::isfinite(sse_new)) fail(ErrorCode::Numeric, fmt::format("non-finite residual at iteration {}", it));
      if (sse_new <= sse) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      rep.converged = true;  // no descent left along the Gauss-Newton direction
      break;
    }
    const double rel = (sse - sse_new) / sse;
    p = candidate;
    sse = sse_new;
    rep.residual_history.push_back(sse);
    rep.iterations = it;
    if (rel < opts.tol) {
      rep.converged = true;
      break;
    }
  }

  for (std::size_t r = 0; r < R; ++r)
    rep.theta.push_back({p[static_cast<Eigen::Index>(3 * r)], p[static_cast<Eigen::Index>(3 * r + 1)],
                         p[static_cast<Eigen::Index>(3 * r + 2)]});
  if (opts.fit_background) rep.fitted_background = p[static_cast<Eigen::Index>(3 * R)];
  return rep;
}

ParameterMatrix refine_intensities(const ParameterMatrix& theta, const std::vector<sim::Measurement>& ms, double h,
                                   const GaussNewtonOptions& opts) {
  const auto R = static_cast<Eigen::Index>(theta.size());
  const Eigen::Index cols = R + (opts.fit_background ? 1 : 0);
  if (R == 0) fail(ErrorCode::Config, "at least one source is required");
  if (static_cast<Eigen::Index>(ms.size()) < cols) fail(ErrorCode::Estimation, "fewer measurements than parameters");
  const auto rows = static_cast<Eigen::Index>(ms.size());
  Eigen::MatrixXd A(rows, cols);
  Eigen::VectorXd c(rows);
  for (Eigen::Index m = 0; m < rows; ++m) {
    const auto& s = ms[static_cast<std::size_t>(m)];
    const double hm = opts.per_measurement_height ? s.z_agl : h;
    for (Eigen::Index r = 0; r < R; ++r) {
      const auto& t = theta[static_cast<std::size_t>(r)];
      A(m, r) = 1.0 / ((s.x - t.x) * (s.x - t.x) + (s.y - t.y) * (s.y - t.y) + hm * hm);
    }
    if (opts.fit_background) A(m, R) = 1.0;
    c[m] = s.counts - opts.background;
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < cols) fail(ErrorCode::RankDeficient, "source positions give dependent intensity columns");
  const Eigen::VectorXd sol = qr.solve(c);
  if (!sol.allFinite()) fail(ErrorCode::Numeric, "non-finite intensity solution");
  ParameterMatrix out = theta;
  for (Eigen::Index r = 0; r < R; ++r)
    if (sol[r] > 0.0) out[static_cast<std::size_t>(r)].alpha = sol[r];
  return out;
}

GaussNewtonReport gauss_newton_multistart(const ParameterMatrix& theta0, const std::vector<sim::Measurement>& ms,
                                          double h, const GaussNewtonOptions& opts, double offset, int max_rounds) {
  GaussNewtonReport best = gauss_newton(theta0, ms, h, opts);
  if (!(offset > 0.0)) return best;
  const double moves[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (int round = 0; round < max_rounds; ++round) {
    bool improved = false;
    for (std::size_t r = 0; r < best.theta.size(); ++r)
      for (const auto& mv : moves) {
        ParameterMatrix start = best.theta;
        start[r].x += offset * mv[0];
        start[r].y += offset * mv[1];
        try {
          auto cand = gauss_newton(refine_intensities(start, ms, h, opts), ms, h, opts);
          // Relative margin so rounding noise cannot cycle between equal minima.
          if (cand.residual_history.back() < best.residual_history.back() * (1.0 - 1e-9)) {
            cand.restarts_accepted = best.restarts_accepted + 1;
            best = std::move(cand);
            improved = true;
          }
        } catch (const Error&) {
        }
      }
    if (!improved) break;
  }
  return best;
}

double LocalizationScore::mean_error() const {
  if (matches.empty()) return 0.0;
  double s = 0.0;
  for (const auto& m : matches) s += m.distance;
  return s / static_cast<double>(matches.size());
}

LocalizationScore score(const ParameterMatrix& theta, const std::vector<sim::RadSource>& truth, double max_match,
                        const std::function<std::string(int)>& miss_reason) {
  const int E = static_cast<int>(theta.size());
  const int T = static_cast<int>(truth.size());
  std::vector<double> dist(static_cast<std::size_t>(E * T));
  for (int e = 0; e < E; ++e)
    for (int t = 0; t < T; ++t)
      dist[static_cast<std::size_t>(e * T + t)] =
          std::hypot(theta[static_cast<std::size_t>(e)].x - truth[static_cast<std::size_t>(t)].x,
                     theta[static_cast<std::size_t>(e)].y - truth[static_cast<std::size_t>(t)].y);

  std::vector<int> assign(static_cast<std::size_t>(E), -1);
  if (E <= 6) {
    std::vector<int> best = assign;
    int best_n = -1;
    double best_d = std::numeric_limits<double>::infinity();
    std::vector<char> used(static_cast<std::size_t>(T), 0);
    std::vector<int> cur(static_cast<std::size_t>(E), -1);
    std::function<void(int, int, double)> rec = [&](int e, int n, double d) {
      if (e == E) {
        if (n > best_n || (n == best_n && d < best_d - 1e-12)) {
          best_n = n;
          best_d = d;
          best = cur;
        }
        return;
      }
      cur[static_cast<std::size_t>(e)] = -1;
      rec(e + 1, n, d);
      for (int t = 0; t < T; ++t) {
        const double dd = dist[static_cast<std::size_t>(e * T + t)];
        if (used[static_cast<std::size_t>(t)] || dd > max_match) continue;
        used[static_cast<std::size_t>(t)] = 1;
        cur[static_cast<std::size_t>(e)] = t;
        rec(e + 1, n + 1, d + dd);
        used[static_cast<std::size_t>(t)] = 0;
        cur[static_cast<std::size_t>(e)] = -1;
      }
    };
    rec(0, 0, 0.0);
    assign = best;
  } else {
    std::vector<std::pair<double, std::pair<int, int>>> pairs;
    for (int e = 0; e < E; ++e)
      for (int t = 0; t < T; ++t)
        if (dist[static_cast<std::size_t>(e * T + t)] <= max_match)
          pairs.push_back({dist[static_cast<std::size_t>(e * T + t)], {e, t}});
    std::sort(pairs.begin(), pairs.end());
    std::vector<char> used(static_cast<std::size_t>(T), 0);
    for (const auto& [d, et] : pairs) {
      const auto [e, t] = et;
      if (assign[static_cast<std::size_t>(e)] >= 0 || used[static_cast<std::size_t>(t)]) continue;
      assign[static_cast<std::size_t>(e)] = t;
      used[static_cast<std::size_t>(t)] = 1;
    }
  }

  LocalizationScore s;
  std::vector<char> matched(static_cast<std::size_t>(T), 0);
  for (int e = 0; e < E; ++e) {
    const int t = assign[static_cast<std::size_t>(e)];
    if (t < 0) {
      s.false_alarms.push_back(e);
      continue;
    }
    matched[static_cast<std::size_t>(t)] = 1;
    s.matches.push_back({e, t, dist[static_cast<std::size_t>(e * T + t)]});
  }
  std::sort(s.matches.begin(), s.matches.end(), [](const Match& a, const Match& b) { return a.truth < b.truth; });
  for (int t = 0; t < T; ++t)
    if (!matched[static_cast<std::size_t>(t)]) s.misses.push_back({t, miss_reason ? miss_reason(t) : "Not resolved"});
  return s;
}

double estimate_stripping(const std::vector<sim::Measurement>& co_only, const WindowBackground& bg) {
  std::vector<double> xs, ys;
  for (const auto& m : co_only) {
    if (!m.windows) fail(ErrorCode::Data, "stripping estimate needs window counts");
    xs.push_back(m.windows->co - bg.co);
    ys.push_back(m.windows->cs - bg.cs);
  }
  if (xs.size() < 2) fail(ErrorCode::Estimation, "stripping estimate needs at least 2 samples");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  // Raw Co-window spread must clearly exceed Poisson scatter (variance ~ mean).
  const double mean_raw = mx + bg.co;
  if (sxx / n <= std::max(1e-12, 2.0 * mean_raw))
    fail(ErrorCode::Estimation, "Co window shows no dynamic range beyond counting noise");
  return sxy / sxx;
}

std::vector<NetCounts> separate_isotopes(const std::vector<sim::Measurement>& ms, double k, const WindowBackground& bg) {
  std::vector<NetCounts> out;
  out.reserve(ms.size());
  for (const auto& m : ms) {
    if (!m.windows) fail(ErrorCode::Data, "isotope separation needs window counts");
    const double co = std::max(0.0, m.windows->co - bg.co);
    const double cs = std::max(0.0, m.windows->cs - bg.cs - k * co);
    out.push_back({cs, co});
  }
  return out;
}

nlohmann::json estimates_to_json(const ParameterMatrix& theta) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : theta) arr.push_back({{"alpha", s.alpha}, {"x", s.x}, {"y", s.y}});
  return arr;
}

ParameterMatrix estimates_from_json(const nlohmann::json& j) {
  ParameterMatrix out;
  for (const auto& e : j) out.push_back({e.at("alpha").get<double>(), e.at("x").get<double>(), e.at("y").get<double>()});
  return out;
}

nlohmann::json report_to_json(const GaussNewtonReport& r) {
  return {{"theta", estimates_to_json(r.theta)},
          {"fitted_background", r.fitted_background},
          {"iterations", r.iterations},
          {"residual_history", r.residual_history},
          {"converged", r.converged},
          {"restarts_accepted", r.restarts_accepted},
          {"jacobian_dims", {r.jacobian_rows, r.jacobian_cols}}};
}

nlohmann::json score_to_json(const LocalizationScore& s, const std::vector<sim::RadSource>& truth) {
  using nlohmann::json;
  json matches = json::array();
  for (const auto& m : s.matches)
    matches.push_back({{"source", truth[static_cast<std::size_t>(m.truth)].id}, {"estimate", m.estimate}, {"error", m.distance}});
  json misses = json::array();
  for (const auto& m : s.misses) misses.push_back({{"source", truth[static_cast<std::size_t>(m.truth)].id}, {"reason", m.reason}});
  return json{{"matches", matches}, {"misses", misses}, {"false_alarms", s.false_alarms}, {"mean_error", s.mean_error()}};
}

}  // namespace radsurvey::loc

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "radsurvey/error.hpp"
#include "radsurvey/geo/geometry.hpp"
#include "radsurvey/gridding/delaunay.hpp"
#include "radsurvey/gridding/hotspots.hpp"
#include "radsurvey/gridding/raster.hpp"
#include "support.hpp"

using namespace radsurvey;
using namespace radsurvey::gridding;
using geo::Point2;

namespace {

sim::Measurement meas(double x, double y, double counts) {
  sim::Measurement m;
  m.x = x;
  m.y = y;
  m.counts = counts;
  return m;
}

// Andrew's monotone chain, for the hull-area oracle.
double hull_area(std::vector<Point2> p) {
  std::sort(p.begin(), p.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  std::vector<Point2> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && geo::cross(h[k - 1] - h[k - 2], p[i] - h[k - 2]) <= 0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && geo::cross(h[k - 1] - h[k - 2], p[i - 1] - h[k - 2]) <= 0) --k;
    h[k++] = p[i - 1];
  }
  h.resize(k - 1);
  return geo::signed_area(h);
}

std::vector<Point2> random_points(std::uint64_t seed, int n, double extent) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, extent);
  std::vector<Point2> pts;
  for (int i = 0; i < n; ++i) pts.push_back({u(rng), u(rng)});
  return pts;
}

}  // namespace

TEST(Downsample, IdentityAndSums) {
  std::vector<sim::Measurement> ms;
  for (int i = 0; i < 10; ++i) ms.push_back(meas(i, 2.0 * i, 1.0 + i));
  const auto same = downsample_by_summing(ms, 1);
  ASSERT_EQ(same.size(), 10u);
  EXPECT_EQ(same[3].counts, 4.0);

  const auto d = downsample_by_summing(ms, 4);
  ASSERT_EQ(d.size(), 2u);
  // Group centroids and sums computed by hand: {0..3} and {4..7}.
  EXPECT_DOUBLE_EQ(d[0].x, 1.5);
  EXPECT_DOUBLE_EQ(d[0].y, 3.0);
  EXPECT_DOUBLE_EQ(d[0].counts, 1 + 2 + 3 + 4);
  EXPECT_DOUBLE_EQ(d[1].x, 5.5);
  EXPECT_DOUBLE_EQ(d[1].counts, 5 + 6 + 7 + 8);

  std::vector<sim::Measurement> eq(4, meas(1, 1, 5));
  EXPECT_EQ(downsample_by_summing(eq, 4)[0].counts, 20.0);
  EXPECT_TRUE(downsample_by_summing({}, 4).empty());
  EXPECT_THROW(downsample_by_summing(ms, 0), Error);
}

TEST(Downsample, WindowsSummedOnlyWhenComplete) {
  std::vector<sim::Measurement> ms(4, meas(0, 0, 1));
  for (auto& m : ms) m.windows = sim::WindowCounts{2, 1};
  EXPECT_EQ(downsample_by_summing(ms, 4)[0].windows->cs, 8.0);
  ms[2].windows.reset();
  EXPECT_FALSE(downsample_by_summing(ms, 4)[0].windows.has_value());
}

TEST(Delaunay, EmptyCircumcircleProperty) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto pts = random_points(seed, 150, 50.0);
    const Triangulation t = delaunay(pts, std::vector<double>(pts.size(), 0.0));
    double area = 0.0;
    for (const auto& tri : t.triangles) {
      const Point2 a = t.points[tri[0]], b = t.points[tri[1]], c = t.points[tri[2]];
      const double s = geo::cross(b - a, c - a);
      EXPECT_GT(s, 0.0) << "counter-clockwise";
      area += 0.5 * s;
      // In-circle determinant against every other point.
      for (std::size_t i = 0; i < t.points.size(); ++i) {
        if (static_cast<int>(i) == tri[0] || static_cast<int>(i) == tri[1] || static_cast<int>(i) == tri[2]) continue;
        const Point2 d = t.points[i];
        const double ax = a.x - d.x, ay = a.y - d.y, bx = b.x - d.x, by = b.y - d.y, cx = c.x - d.x, cy = c.y - d.y;
        const double det = (ax * ax + ay * ay) * (bx * cy - cx * by) - (bx * bx + by * by) * (ax * cy - cx * ay) +
                           (cx * cx + cy * cy) * (ax * by - bx * ay);
        EXPECT_LE(det, 1e-6) << "point " << i << " inside a circumcircle";
      }
    }
    EXPECT_NEAR(area, hull_area(pts), 1e-9 * area);
  }
}

TEST(Delaunay, MergesDuplicatesAndRejectsDegenerate) {
  const std::vector<Point2> pts{{0, 0}, {1, 0}, {0, 1}, {0, 0}};
  const Triangulation t = delaunay(pts, {1.0, 2.0, 3.0, 5.0});
  ASSERT_EQ(t.points.size(), 3u);
  EXPECT_DOUBLE_EQ(t.values[0], 3.0);
  EXPECT_THROW(delaunay({{0, 0}, {1, 1}, {2, 2}}, {1, 2, 3}), Error);
  EXPECT_THROW(delaunay({{0, 0}, {1, 1}}, {1, 2}), Error);
}

TEST(Interpolate, ConstantAndAffineFieldsReproduced) {
  const auto pts = random_points(9, 80, 30.0);
  std::vector<sim::Measurement> constant, affine;
  for (const auto& p : pts) {
    constant.push_back(meas(p.x, p.y, 7.0));
    affine.push_back(meas(p.x, p.y, 2 * p.x + 3 * p.y + 1));
  }
  const auto gc = interpolate_grid(constant, 0.5);
  const auto ga = interpolate_grid(affine, 0.5);
  int valid = 0;
  for (int r = 0; r < ga.geometry.rows; ++r)
    for (int c = 0; c < ga.geometry.cols; ++c) {
      if (!ga.valid(r, c)) continue;
      ++valid;
      const Point2 q = ga.geometry.center(r, c);
      EXPECT_NEAR(ga.at(r, c), 2 * q.x + 3 * q.y + 1, 1e-9);
      EXPECT_NEAR(gc.at(r, c), 7.0, 1e-12);
    }
  EXPECT_GT(valid, 2000);
}

TEST(Interpolate, CellsOutsideHullAreNoData) {
  std::vector<sim::Measurement> ms{meas(0.5, 0.5, 1), meas(9.5, 0.5, 1), meas(0.5, 9.5, 1)};
  const auto g = interpolate_grid(ms, 1.0);
  EXPECT_TRUE(g.valid(0, 0));
  EXPECT_FALSE(g.valid(9, 9));
  EXPECT_THROW(interpolate_grid({meas(0, 0, 1), meas(1, 1, 1)}, 1.0), Error);
}

TEST(Interpolate, ValueAtSampleNode) {
  // Samples placed on cell centers: the interpolant must hit them exactly.
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> cell(0, 39);
  std::uniform_real_distribution<double> val(0, 100);
  std::vector<Point2> pts;
  std::vector<double> vals;
  for (int i = 0; i < 60; ++i) {
    pts.push_back({cell(rng) + 0.5, cell(rng) + 0.5});
    vals.push_back(val(rng));
  }
  // Corner anchors keep every sample strictly inside the hull.
  for (Point2 p : {Point2{0.5, 0.5}, Point2{39.5, 0.5}, Point2{0.5, 39.5}, Point2{39.5, 39.5}}) {
    pts.push_back(p);
    vals.push_back(1.0);
  }
  const Triangulation tri = delaunay(pts, vals);
  const geo::GridMap g = rasterize(tri, geo::GridGeometry{0, 0, 1, 40, 40});
  for (std::size_t i = 0; i < tri.points.size(); ++i) {
    const auto c = g.geometry.cell_of(tri.points[i].x, tri.points[i].y);
    ASSERT_TRUE(c && g.valid(c->row, c->col));
    EXPECT_NEAR(g.at(c->row, c->col), tri.values[i], 1e-9);
  }
}

TEST(Thresholds, HandArithmetic) {
  const auto t = adaptive_thresholds({0, 0, 0, 0, 10});
  EXPECT_DOUBLE_EQ(t.mu, 2.0);
  EXPECT_DOUBLE_EQ(t.sigma, 4.0);
  EXPECT_DOUBLE_EQ(t.t_bg, 4.0);
  EXPECT_DOUBLE_EQ(t.mu_bg, 0.0);
  EXPECT_DOUBLE_EQ(t.sigma_bg, 0.0);
  EXPECT_DOUBLE_EQ(t.t_hot, 0.0);
}

TEST(Thresholds, ConstantDataset) {
  const auto t = adaptive_thresholds(std::vector<double>(17, 3.25));
  EXPECT_DOUBLE_EQ(t.sigma, 0.0);
  EXPECT_DOUBLE_EQ(t.t_bg, 3.25);
  EXPECT_DOUBLE_EQ(t.t_hot, 3.25);
  EXPECT_THROW(adaptive_thresholds({1.0}), Error);
}

TEST(Thresholds, GaussianWithSpikesMatchesDirectFormula) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(100, 10);
  std::vector<double> v;
  for (int i = 0; i < 100000; ++i) v.push_back(n(rng));
  for (int i = 0; i < 100; ++i) v.push_back(1e4);
  // Two-pass oracle with long double accumulation.
  long double s = 0;
  for (double x : v) s += x;
  const long double mu = s / v.size();
  long double q = 0;
  for (double x : v) q += (x - mu) * (x - mu);
  const double t_bg = static_cast<double>(mu + std::sqrt(q / v.size()) / 2);
  long double sb = 0, nb = 0;
  for (double x : v)
    if (x <= t_bg) sb += x, nb += 1;
  const long double mub = sb / nb;
  long double qb = 0;
  for (double x : v)
    if (x <= t_bg) qb += (x - mub) * (x - mub);
  const double t_hot = static_cast<double>(mub + 3 * std::sqrt(qb / nb));

  const auto t = adaptive_thresholds(v);
  EXPECT_NEAR(t.t_bg, t_bg, 0.01 * t_bg);
  EXPECT_NEAR(t.t_hot, t_hot, 1e-9 * t_hot);
  EXPECT_DOUBLE_EQ(t.t_bg, t.mu + t.sigma / 2);
  EXPECT_DOUBLE_EQ(t.t_hot, t.mu_bg + 3 * t.sigma_bg);
  EXPECT_GE(t.t_hot, t.mu_bg);
}

TEST(Thresholds, ShiftAndScaleEquivariance) {
  std::mt19937_64 rng(77);
  std::exponential_distribution<double> e(0.05);
  std::uniform_real_distribution<double> shift(-500, 500), scale(0.1, 20);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(50 + trial);
    for (auto& x : v) x = std::round(e(rng));
    const auto base = adaptive_thresholds(v);
    const double c = std::round(shift(rng));
    const double k = std::exp2(std::round(std::log2(scale(rng))));  // powers of two keep scaling exact
    std::vector<double> vs = v, vk = v;
    for (auto& x : vs) x += c;
    for (auto& x : vk) x *= k;
    const auto ts = adaptive_thresholds(vs);
    const auto tk = adaptive_thresholds(vk);
    EXPECT_NEAR(ts.t_bg, base.t_bg + c, 1e-9 * (std::abs(base.t_bg) + std::abs(c)));
    EXPECT_NEAR(ts.t_hot, base.t_hot + c, 1e-9 * (std::abs(base.t_hot) + std::abs(c)));
    EXPECT_NEAR(tk.t_bg, base.t_bg * k, 1e-9 * std::abs(base.t_bg * k));
    EXPECT_NEAR(tk.t_hot, base.t_hot * k, 1e-9 * std::abs(base.t_hot * k) + 1e-12);
  }
}

TEST(Simplify, TrianglesAndBudgetsAboveSize) {
  const geo::Ring tri{{0, 0}, {4, 0}, {0, 3}};
  EXPECT_EQ(simplify_polygon(tri, 3), tri);
  const geo::Ring sq = fixture::rect(0, 0, 1, 1);
  EXPECT_EQ(simplify_polygon(sq, 10), sq);
  EXPECT_THROW(simplify_polygon(sq, 2), Error);
}

TEST(Simplify, SquareWithMidpointsKeepsCorners) {
  const geo::Ring ring{{0, 0}, {1, 0}, {2, 0}, {2, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};
  const geo::Ring out = simplify_polygon(ring, 4);
  EXPECT_EQ(out, (geo::Ring{{0, 0}, {2, 0}, {2, 2}, {0, 2}}));
}

TEST(Simplify, OracleRemovalOrderAndIdempotence) {
  // Independent re-implementation: recompute every importance from scratch per step.
  auto oracle = [](geo::Ring r, int budget) {
    while (static_cast<int>(r.size()) > budget) {
      std::size_t best = 0;
      double best_i = 1e300;
      for (std::size_t i = 0; i < r.size(); ++i) {
        const Point2 x1 = r[i] - r[(i + r.size() - 1) % r.size()];
        const Point2 x2 = r[(i + 1) % r.size()] - r[i];
        const double l = geo::norm(x1) * geo::norm(x2);
        const double imp = l == 0 ? 0 : std::acos(std::clamp(geo::dot(x1, x2) / l, -1.0, 1.0)) * l;
        if (imp < best_i) best_i = imp, best = i;
      }
      r.erase(r.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return r;
  };
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> jitter(0.7, 1.3);
  for (int trial = 0; trial < 30; ++trial) {
    geo::Ring ring;
    const int n = 10 + trial;
    for (int i = 0; i < n; ++i) {
      const double a = 2 * std::numbers::pi * i / n;
      ring.push_back({10 * jitter(rng) * std::cos(a), 10 * jitter(rng) * std::sin(a)});
    }
    for (int budget : {3, 7, n - 1}) {
      const auto out = simplify_polygon(ring, budget);
      EXPECT_EQ(out, oracle(ring, budget));
      EXPECT_LE(static_cast<int>(out.size()), budget);
      EXPECT_EQ(simplify_polygon(out, budget), out);
    }
  }
}

TEST(Components, FourVersusEightConnectivity) {
  geo::GridGeometry g{0, 0, 1, 3, 3};
  const Mask diag{1, 0, 0, 0, 1, 0, 0, 0, 1};
  EXPECT_EQ(label_components(g, diag, Connectivity::Four).count, 3);
  EXPECT_EQ(label_components(g, diag, Connectivity::Eight).count, 1);
}

TEST(MarchingSquares, CircleContour) {
  geo::GridGeometry g{-10, -10, 0.25, 80, 80};
  std::vector<double> v(g.size());
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) v[g.index(r, c)] = geo::norm(g.center(r, c));
  // Inside = value above the level, so the negated distance gives a disc.
  for (auto& x : v) x = -x;
  const auto rings = marching_squares(g, v, Mask(g.size(), 1), -5.0);
  ASSERT_EQ(rings.size(), 1u);
  EXPECT_NEAR(geo::signed_area(rings[0]), std::numbers::pi * 25.0, 0.01 * std::numbers::pi * 25.0);
  for (const auto& p : rings[0]) EXPECT_NEAR(geo::norm(p), 5.0, 0.02);
}

TEST(MarchingSquares, AnnulusGivesOuterAndHoleRings) {
  geo::GridGeometry g{-10, -10, 0.5, 40, 40};
  std::vector<double> v(g.size());
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) {
      const double d = geo::norm(g.center(r, c));
      v[g.index(r, c)] = (d > 3 && d < 7) ? 1.0 : 0.0;
    }
  const auto rings = marching_squares(g, v, Mask(g.size(), 1), 0.5);
  ASSERT_EQ(rings.size(), 2u);
  int ccw = 0, cw = 0;
  for (const auto& r : rings) (geo::signed_area(r) > 0 ? ccw : cw)++;
  EXPECT_EQ(ccw, 1);
  EXPECT_EQ(cw, 1);
}

TEST(MarchingSquares, SaddleUsesCellAverage) {
  geo::GridGeometry g{0, 0, 1, 2, 2};
  // Diagonal pair above the level; the mean decides whether they join.
  const std::vector<double> joined{1.0, 0.4, 0.4, 1.0};
  const std::vector<double> split{1.0, 0.0, 0.0, 1.0};
  EXPECT_EQ(marching_squares(g, joined, Mask(4, 1), 0.6).size(), 1u);
  EXPECT_EQ(marching_squares(g, split, Mask(4, 1), 0.6).size(), 2u);
}

TEST(MarchingSquares, InvalidCellsCountAsOutside) {
  geo::GridGeometry g{0, 0, 1, 3, 3};
  std::vector<double> v(9, 10.0);
  Mask valid(9, 1);
  valid[4] = 0;
  const auto rings = marching_squares(g, v, valid, 5.0);
  EXPECT_EQ(rings.size(), 2u);  // outer ring and a hole around the invalid center
}

TEST(Morphology, DiscAndOpeningIsAntiExtensive) {
  EXPECT_EQ(disc_offsets(0.0).size(), 1u);
  EXPECT_EQ(disc_offsets(1.0).size(), 5u);
  EXPECT_EQ(disc_offsets(1.5).size(), 9u);

  std::mt19937_64 rng(8);
  geo::GridGeometry g{0, 0, 0.5, 60, 60};
  for (int trial = 0; trial < 10; ++trial) {
    Mask m(g.size());
    for (auto& x : m) x = rng() % 4 != 0;
    for (double r : {0.5, 1.0, 1.5}) {
      const Mask open = dilate(g, erode(g, m, r), r);
      for (std::size_t i = 0; i < m.size(); ++i) EXPECT_LE(open[i], m[i]);
      // Closing is extensive away from the border, where outside cells count as background.
      const Mask close = erode(g, dilate(g, m, r), r);
      const int pad = static_cast<int>(std::ceil(2 * r / g.cell_size));
      for (int row = pad; row < g.rows - pad; ++row)
        for (int col = pad; col < g.cols - pad; ++col)
          if (m[g.index(row, col)]) EXPECT_EQ(close[g.index(row, col)], 1);
    }
  }
}

namespace {

// Blob fixture: Gaussian bumps sampled on a 1 m lattice of measurements.
std::vector<sim::Measurement> blobs(const std::vector<Point2>& centers, double amp, double sigma) {
  std::vector<sim::Measurement> ms;
  for (int i = 0; i <= 60; ++i)
    for (int j = 0; j <= 60; ++j) {
      double v = 10.0;
      for (const auto& c : centers) v += amp * std::exp(-(std::pow(i - c.x, 2) + std::pow(j - c.y, 2)) / (2 * sigma * sigma));
      ms.push_back(meas(i, j, v));
    }
  return ms;
}

std::vector<double> counts_of(const std::vector<sim::Measurement>& ms) {
  std::vector<double> v;
  for (const auto& m : ms) v.push_back(m.counts);
  return v;
}

}  // namespace

TEST(Hotspots, NothingAboveThreshold) {
  const auto ms = blobs({}, 0, 1);
  const auto grid = interpolate_grid(ms, 0.5);
  auto thr = adaptive_thresholds(counts_of(ms));
  EXPECT_TRUE(extract_hotspots(grid, thr, ms, {}).empty());
}

TEST(Hotspots, SingleBlobContainsPeak) {
  const auto ms = blobs({{30, 25}}, 500, 4);
  const auto grid = interpolate_grid(ms, 0.5);
  const auto hs = extract_hotspots(grid, adaptive_thresholds(counts_of(ms)), ms, {});
  ASSERT_EQ(hs.size(), 1u);
  EXPECT_TRUE(geo::point_in_ring(hs[0].contour, {30, 25}));
  EXPECT_TRUE(geo::point_in_ring(hs[0].polygon.envelope, {30, 25}));
  EXPECT_LE(hs[0].polygon.envelope.size(), 7u);
  EXPECT_GE(hs[0].enclosed_samples, 4);
  // Cell centers sit a quarter cell off the sampled crest.
  EXPECT_LE(hs[0].peak_value, 510.0);
  EXPECT_GT(hs[0].peak_value, 490.0);
}

TEST(Hotspots, SeparationDecidesMerging) {
  const auto far = blobs({{15, 30}, {45, 30}}, 500, 3);
  const auto g_far = interpolate_grid(far, 0.5);
  EXPECT_EQ(extract_hotspots(g_far, adaptive_thresholds(counts_of(far)), far, {}).size(), 2u);

  const auto near = blobs({{27, 30}, {33, 30}}, 500, 3);
  const auto g_near = interpolate_grid(near, 0.5);
  EXPECT_EQ(extract_hotspots(g_near, adaptive_thresholds(counts_of(near)), near, {}).size(), 1u);
}

TEST(Hotspots, MinSamplesRuleRejectsSmallBlob) {
  // A one-sample spike encloses a single measurement.
  auto ms = blobs({}, 0, 1);
  ms[30 * 61 + 30].counts = 1000;
  const auto grid = interpolate_grid(ms, 0.25);
  HotspotConfig cfg;
  cfg.erode_radius = 0.0;
  auto thr = adaptive_thresholds(counts_of(ms));
  thr.t_hot = 20.0;
  EXPECT_TRUE(extract_hotspots(grid, thr, ms, cfg).empty());
  cfg.min_samples = 1;
  EXPECT_EQ(extract_hotspots(grid, thr, ms, cfg).size(), 1u);
}

TEST(Hotspots, ContoursDoNotIntersect) {
  const auto ms = blobs({{10, 10}, {30, 40}, {50, 15}}, 400, 3);
  const auto grid = interpolate_grid(ms, 0.5);
  const auto hs = extract_hotspots(grid, adaptive_thresholds(counts_of(ms)), ms, {});
  ASSERT_EQ(hs.size(), 3u);
  for (std::size_t a = 0; a < hs.size(); ++a)
    for (std::size_t b = a + 1; b < hs.size(); ++b) {
      const auto& ra = hs[a].contour;
      const auto& rb = hs[b].contour;
      for (std::size_t i = 0; i < ra.size(); ++i)
        for (std::size_t j = 0; j < rb.size(); ++j)
          ASSERT_FALSE(geo::segments_intersect(ra[i], ra[(i + 1) % ra.size()], rb[j], rb[(j + 1) % rb.size()]));
    }
}

TEST(Hotspots, JsonRoundTrip) {
  const auto ms = blobs({{30, 25}}, 500, 4);
  const auto hs = extract_hotspots(interpolate_grid(ms, 0.5), adaptive_thresholds(counts_of(ms)), ms, {});
  const auto j = hotspots_to_json(hs);
  EXPECT_EQ(hotspots_to_json(hotspots_from_json(j)), j);
}

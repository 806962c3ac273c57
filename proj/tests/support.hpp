#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "radsurvey/geo/types.hpp"
#include "radsurvey/sim/field.hpp"

namespace radsurvey::fixture {

inline geo::Dem make_dem(double origin_x, double origin_y, double cell, int rows, int cols,
                         const std::function<double(double, double)>& height) {
  geo::GridGeometry g{origin_x, origin_y, cell, rows, cols};
  std::vector<double> h(g.size());
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const auto p = g.center(r, c);
      h[g.index(r, c)] = height(p.x, p.y);
    }
  return geo::Dem(g, std::move(h));
}

inline geo::Dem flat_dem(double origin_x, double origin_y, double cell, int rows, int cols, double z = 0.0) {
  return make_dem(origin_x, origin_y, cell, rows, cols, [z](double, double) { return z; });
}

inline geo::Ring rect(double x0, double y0, double x1, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

/// Noiseless measurements of the pure inverse-square model on a square grid.
inline std::vector<sim::Measurement> model_grid(const std::vector<sim::RadSource>& sources, double x0, double y0,
                                                double step, int n, double h, double background = 0.0) {
  std::vector<sim::Measurement> out;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      sim::Measurement m;
      m.x = x0 + i * step;
      m.y = y0 + j * step;
      m.z_agl = h;
      double c = background;
      for (const auto& s : sources) c += s.emission / ((m.x - s.x) * (m.x - s.x) + (m.y - s.y) * (m.y - s.y) + h * h);
      m.counts = c;
      out.push_back(m);
    }
  return out;
}

inline sim::RadSource point_source(double emission, double x, double y,
                                   sim::Isotope iso = sim::Isotope::Co60) {
  sim::RadSource s;
  s.id = "s";
  s.isotope = iso;
  s.activity_mbq = emission / 100.0;
  s.x = x;
  s.y = y;
  s.emission = emission;
  return s;
}

}  // namespace radsurvey::fixture

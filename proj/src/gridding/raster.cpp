#include "radsurvey/gridding/raster.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "radsurvey/error.hpp"

namespace radsurvey::gridding {

Components label_components(const geo::GridGeometry& g, const Mask& mask, Connectivity conn) {
  if (mask.size() != g.size()) fail(ErrorCode::Geometry, "mask size does not match grid");
  Components out;
  out.label.assign(g.size(), -1);
  std::vector<std::size_t> stack;
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      const std::size_t seed = g.index(r, c);
      if (!mask[seed] || out.label[seed] >= 0) continue;
      const int id = out.count++;
      out.cells.emplace_back();
      out.label[seed] = id;
      stack.push_back(seed);
      while (!stack.empty()) {
        const std::size_t cur = stack.back();
        stack.pop_back();
        out.cells[static_cast<std::size_t>(id)].push_back(cur);
        const int cr = static_cast<int>(cur / static_cast<std::size_t>(g.cols));
        const int cc = static_cast<int>(cur % static_cast<std::size_t>(g.cols));
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            if (dr == 0 && dc == 0) continue;
            if (conn == Connectivity::Four && dr != 0 && dc != 0) continue;
            const int nr = cr + dr;
            const int nc = cc + dc;
            if (!g.in_bounds(nr, nc)) continue;
            const std::size_t ni = g.index(nr, nc);
            if (mask[ni] && out.label[ni] < 0) {
              out.label[ni] = id;
              stack.push_back(ni);
            }
          }
        }
      }
    }
  }
  for (auto& cells : out.cells) std::sort(cells.begin(), cells.end());
  return out;
}

std::vector<geo::Ring> marching_squares(const geo::GridGeometry& g, const std::vector<double>& values,
                                        const Mask& valid, double level) {
  if (values.size() != g.size() || valid.size() != g.size()) fail(ErrorCode::Geometry, "grid arrays do not match geometry");
  // Corners of the dual grid are cell centers, padded by one on every side.
  const long W = g.cols + 2;
  auto inside = [&](int r, int c) {
    if (!g.in_bounds(r, c)) return false;
    const std::size_t i = g.index(r, c);
    return valid[i] != 0 && values[i] > level;
  };
  auto known = [&](int r, int c) { return g.in_bounds(r, c) && valid[g.index(r, c)] != 0; };
  auto value = [&](int r, int c) { return values[g.index(r, c)]; };
  auto corner_pos = [&](int r, int c) { return g.center(r, c); };

  // Crossing point on the edge between corners a (inside) and b (outside).
  auto crossing = [&](int ra, int ca, int rb, int cb) {
    const geo::Point2 pa = corner_pos(ra, ca);
    const geo::Point2 pb = corner_pos(rb, cb);
    double t = 0.5;
    if (known(rb, cb)) {
      const double va = value(ra, ca);
      const double vb = value(rb, cb);
      t = (va - level) / (va - vb);
    }
    return pa + t * (pb - pa);
  };
  auto hkey = [&](int r, int c) { return 2 * ((static_cast<long>(r) + 1) * W + (c + 1)); };
  auto vkey = [&](int r, int c) { return 2 * ((static_cast<long>(r) + 1) * W + (c + 1)) + 1; };

  std::unordered_map<long, long> next;       // segment start key -> end key
  std::unordered_map<long, geo::Point2> pos;  // key -> crossing point
  std::vector<long> starts;

  for (int i = -1; i < g.rows; ++i) {
    for (int j = -1; j < g.cols; ++j) {
      // Corner order: BL, BR, TR, TL (counter-clockwise).
      const int cr[4] = {i, i, i + 1, i + 1};
      const int cc[4] = {j, j + 1, j + 1, j};
      bool in[4];
      int code = 0;
      for (int k = 0; k < 4; ++k) {
        in[k] = inside(cr[k], cc[k]);
        code |= (in[k] ? 1 : 0) << k;
      }
      if (code == 0 || code == 15) continue;
      // Edge k runs from corner k to corner k+1.
      const long keys[4] = {hkey(i, j), vkey(i, j + 1), hkey(i + 1, j), vkey(i, j)};
      auto edge_point = [&](int k) {
        const int a = k;
        const int b = (k + 1) % 4;
        if (!pos.count(keys[k])) {
          pos[keys[k]] = in[a] ? crossing(cr[a], cc[a], cr[b], cc[b]) : crossing(cr[b], cc[b], cr[a], cc[a]);
        }
        return keys[k];
      };
      auto link = [&](int from, int to) {
        const long a = edge_point(from);
        const long b = edge_point(to);
        next[a] = b;
        starts.push_back(a);
      };
      if (code == 5 || code == 10) {
        double mean = 0.0;
        int n = 0;
        for (int k = 0; k < 4; ++k) {
          if (known(cr[k], cc[k])) {
            mean += value(cr[k], cc[k]);
            ++n;
          }
        }
        const bool joined = n == 4 && mean / 4.0 >= level;
        if (code == 5) {  // BL and TR inside
          if (joined) {
            link(0, 1);
            link(2, 3);
          } else {
            link(0, 3);
            link(2, 1);
          }
        } else {  // BR and TL inside
          if (joined) {
            link(1, 2);
            link(3, 0);
          } else {
            link(1, 0);
            link(3, 2);
          }
        }
        continue;
      }
      int from = -1;
      int to = -1;
      for (int k = 0; k < 4; ++k) {
        const bool a = in[k];
        const bool b = in[(k + 1) % 4];
        if (a && !b) from = k;
        if (!a && b) to = k;
      }
      link(from, to);
    }
  }

  std::vector<geo::Ring> rings;
  std::unordered_map<long, bool> used;
  std::sort(starts.begin(), starts.end());
  for (long s : starts) {
    if (used[s]) continue;
    geo::Ring ring;
    long k = s;
    while (!used[k]) {
      used[k] = true;
      const geo::Point2 p = pos.at(k);
      if (ring.empty() || !(ring.back() == p)) ring.push_back(p);
      k = next.at(k);
    }
    while (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
    if (ring.size() >= 3) rings.push_back(std::move(ring));
  }
  return rings;
}

std::vector<geo::Ring> marching_squares(const geo::GridMap& grid, double level) {
  Mask valid(grid.no_data.size());
  for (std::size_t i = 0; i < valid.size(); ++i) valid[i] = grid.no_data[i] ? 0 : 1;
  return marching_squares(grid.geometry, grid.values, valid, level);
}

std::vector<geo::Ring> contour_mask(const geo::GridGeometry& g, const Mask& mask) {
  std::vector<double> values(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) values[i] = mask[i] ? 1.0 : 0.0;
  return marching_squares(g, values, Mask(mask.size(), 1), 0.5);
}

std::vector<std::pair<int, int>> disc_offsets(double radius_cells) {
  std::vector<std::pair<int, int>> out;
  const int R = static_cast<int>(std::floor(radius_cells + 1e-9));
  const double r2 = radius_cells * radius_cells + 1e-9;
  for (int dr = -R; dr <= R; ++dr)
    for (int dc = -R; dc <= R; ++dc)
      if (dr * dr + dc * dc <= r2) out.emplace_back(dr, dc);
  return out;
}

namespace {

Mask morph(const geo::GridGeometry& g, const Mask& mask, double radius, bool dilation) {
  if (mask.size() != g.size()) fail(ErrorCode::Geometry, "mask size does not match grid");
  if (radius < 0.0) fail(ErrorCode::Config, "structuring radius must be >= 0");
  if (radius == 0.0) return mask;
  const auto disc = disc_offsets(radius / g.cell_size);
  Mask out(mask.size(), 0);
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      bool any = false;
      bool all = true;
      for (const auto& [dr, dc] : disc) {
        const bool v = g.in_bounds(r + dr, c + dc) && mask[g.index(r + dr, c + dc)];
        any = any || v;
        all = all && v;
        if (dilation ? any : !all) break;
      }
      out[g.index(r, c)] = (dilation ? any : all) ? 1 : 0;
    }
  }
  return out;
}

}  // namespace

Mask erode(const geo::GridGeometry& g, const Mask& mask, double radius) { return morph(g, mask, radius, false); }
Mask dilate(const geo::GridGeometry& g, const Mask& mask, double radius) { return morph(g, mask, radius, true); }

}  // namespace radsurvey::gridding

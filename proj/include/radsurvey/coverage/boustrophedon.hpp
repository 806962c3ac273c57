#pragma once

#include <vector>

#include "radsurvey/geo/types.hpp"

namespace radsurvey::coverage {

/// Slice of a cell between two consecutive critical heights, expressed in
/// the sweep frame (survey lines run along +x after rotating by -sweep_dir).
struct Trapezoid {
  double y_lo = 0.0, y_hi = 0.0;
  double xl_lo = 0.0, xl_hi = 0.0;  // left side at y_lo / y_hi
  double xr_lo = 0.0, xr_hi = 0.0;  // right side at y_lo / y_hi
};

struct Cell {
  geo::Ring polygon;                  // world frame, counter-clockwise
  std::vector<Trapezoid> trapezoids;  // sweep frame, bottom to top
  double area = 0.0;
};

struct CellDecomposition {
  std::vector<Cell> cells;
  std::vector<std::vector<int>> adjacency;  // sorted neighbor lists
  double sweep_dir = 0.0;                   // radians
};

/// Boustrophedon decomposition with survey lines parallel to `sweep_dir`.
/// Throws Geometry for a region of zero area.
CellDecomposition decompose_boustrophedon(const geo::RegionPolygon& region, double sweep_dir);

/// Decomposition of several disjoint parts into one cell list; parts are not
/// adjacent to each other.
CellDecomposition decompose_parts(const std::vector<geo::RegionPolygon>& parts, double sweep_dir);

/// Direction among k * 22.5 deg, k = 0..7, giving the fewest cells; ties go
/// to the smallest angle.
double auto_sweep_direction(const std::vector<geo::RegionPolygon>& parts);

/// Interval [xl, xr] of the cell at height y in the sweep frame, if any.
bool cell_span(const Cell& cell, double y, double& xl, double& xr);

/// Depth-first preorder from `start`, neighbors in ascending index order.
/// Unreached cells (disconnected parts) start new searches in index order.
std::vector<int> order_cells(const CellDecomposition& dec, int start);

}  // namespace radsurvey::coverage

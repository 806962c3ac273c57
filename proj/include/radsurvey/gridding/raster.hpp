#pragma once

#include <cstdint>
#include <vector>

#include "radsurvey/geo/types.hpp"

namespace radsurvey::gridding {

using Mask = std::vector<std::uint8_t>;  // one byte per cell, row-major

enum class Connectivity { Four, Eight };

struct Components {
  std::vector<int> label;  // -1 for background, else component id
  int count = 0;
  std::vector<std::vector<std::size_t>> cells;  // cell indices per component
};

Components label_components(const geo::GridGeometry& g, const Mask& mask, Connectivity conn);

/// Closed iso-contours of `values` at `level` over cell centers. A center is
/// inside when it is valid and its value exceeds `level`; the grid is padded
/// with outside centers, so every ring closes. Crossings are linearly
/// interpolated (midpoint when the outside center is invalid or padding).
/// Saddles join the diagonal inside pair when the mean of the four corners
/// is >= level. Rings keep the inside on their left: outer boundaries are
/// counter-clockwise, holes clockwise.
std::vector<geo::Ring> marching_squares(const geo::GridGeometry& g, const std::vector<double>& values,
                                        const Mask& valid, double level);
std::vector<geo::Ring> marching_squares(const geo::GridMap& grid, double level);

/// Contours of a binary mask at level 0.5.
std::vector<geo::Ring> contour_mask(const geo::GridGeometry& g, const Mask& mask);

/// Offsets of a discrete disc with radius `radius_cells`.
std::vector<std::pair<int, int>> disc_offsets(double radius_cells);

/// Minkowski erosion / dilation with a disc of the given metric radius.
/// Cells beyond the grid count as background.
Mask erode(const geo::GridGeometry& g, const Mask& mask, double radius);
Mask dilate(const geo::GridGeometry& g, const Mask& mask, double radius);

}  // namespace radsurvey::gridding

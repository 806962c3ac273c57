#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace radsurvey::geo {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Point2 xy() const { return {x, y}; }
  friend bool operator==(const Point3&, const Point3&) = default;
};

struct CellIndex {
  int row = 0;
  int col = 0;

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

/// Regular raster geometry. The origin is the south-west corner of the
/// extent; row 0 is the southern-most row and cell (r, c) has its center at
/// (origin_x + (c + 0.5) * cell_size, origin_y + (r + 0.5) * cell_size).
struct GridGeometry {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double cell_size = 1.0;
  int rows = 0;
  int cols = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(col);
  }
  bool in_bounds(int row, int col) const { return row >= 0 && col >= 0 && row < rows && col < cols; }
  Point2 center(int row, int col) const {
    return {origin_x + (col + 0.5) * cell_size, origin_y + (row + 0.5) * cell_size};
  }
  double max_x() const { return origin_x + cols * cell_size; }
  double max_y() const { return origin_y + rows * cell_size; }
  bool contains(double x, double y) const {
    return x >= origin_x && x <= max_x() && y >= origin_y && y <= max_y();
  }
  /// Cell containing (x, y); points on the far boundary map to the last cell.
  std::optional<CellIndex> cell_of(double x, double y) const;

  /// Throws Config unless cell_size > 0 and rows, cols > 0.
  void validate() const;

  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

class Dem {
 public:
  Dem() = default;
  Dem(GridGeometry geometry, std::vector<double> heights);

  const GridGeometry& geometry() const { return geometry_; }
  const std::vector<double>& heights() const { return heights_; }
  double at(int row, int col) const { return heights_[geometry_.index(row, col)]; }

 private:
  GridGeometry geometry_;
  std::vector<double> heights_;
};

struct GridMap {
  GridGeometry geometry;
  std::vector<double> values;
  std::vector<std::uint8_t> no_data;

  GridMap() = default;
  explicit GridMap(GridGeometry g)
      : geometry(g), values(g.size(), 0.0), no_data(g.size(), 1) {}

  bool valid(int row, int col) const { return no_data[geometry.index(row, col)] == 0; }
  double at(int row, int col) const { return values[geometry.index(row, col)]; }
};

struct BinaryGrid {
  GridGeometry geometry;
  std::vector<std::uint8_t> occupied;

  BinaryGrid() = default;
  explicit BinaryGrid(GridGeometry g, bool fill = false)
      : geometry(g), occupied(g.size(), fill ? 1 : 0) {}

  bool at(int row, int col) const { return occupied[geometry.index(row, col)] != 0; }
  void set(int row, int col, bool value) { occupied[geometry.index(row, col)] = value ? 1 : 0; }
  std::size_t count_occupied() const;

  friend bool operator==(const BinaryGrid&, const BinaryGrid&) = default;
};

/// Closed vertex ring; the closing edge from back() to front() is implicit.
using Ring = std::vector<Point2>;

/// Envelope (counter-clockwise) minus holes (clockwise).
struct RegionPolygon {
  Ring envelope;
  std::vector<Ring> holes;
};

struct Trajectory {
  std::vector<Point3> waypoints;
  double speed = 1.0;
  double sampling_period = 1.0;

  double length_2d() const;
  double length_3d() const;
  /// Throws Validity unless >= 2 waypoints and speed, sampling_period > 0.
  void validate() const;
};

}  // namespace radsurvey::geo

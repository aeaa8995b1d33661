#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace seaice {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Velocity placement. B: full vector at cell corners. CD1/CD2: full vector at
/// edge midpoints; CD1 uses the nonconforming rotated-bilinear element, CD2 the
/// conforming element on the diamond mesh.
enum class Staggering { B, CD1, CD2 };

std::string_view to_string(Staggering s);
Staggering parse_staggering(std::string_view name);

/// Structured rectangular mesh on [0,L]x[0,L].
///
/// Index conventions (all row-major, i along x, j along y):
///   cell    c = j*nx + i
///   vertex  v = j*(nx+1) + i
///   x-face  (normal along x, the vertical edge at x = i*hx)
///           e = j*(nx+1) + i,                 i in [0,nx], j in [0,ny)
///   y-face  (normal along y, the horizontal edge at y = j*hy)
///           e = num_xfaces() + j*nx + i,      i in [0,nx), j in [0,ny]
/// Immutable after construction.
class Grid {
 public:
  /// Square cells of side h. Throws std::invalid_argument unless L/h is an integer.
  static Grid build(double L, double h);
  /// General nx-by-ny subdivision (rectangular cells).
  static Grid build(double L, int nx, int ny);

  double length() const { return L_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  bool square_cells() const { return nx_ == ny_; }

  int num_cells() const { return nx_ * ny_; }
  int num_vertices() const { return (nx_ + 1) * (ny_ + 1); }
  int num_xfaces() const { return (nx_ + 1) * ny_; }
  int num_yfaces() const { return nx_ * (ny_ + 1); }
  int num_edges() const { return num_xfaces() + num_yfaces(); }
  double cell_area() const { return hx_ * hy_; }

  int cell(int i, int j) const { return j * nx_ + i; }
  int vertex(int i, int j) const { return j * (nx_ + 1) + i; }
  int xface(int i, int j) const { return j * (nx_ + 1) + i; }
  int yface(int i, int j) const { return num_xfaces() + j * nx_ + i; }
  bool is_xface(int e) const { return e < num_xfaces(); }

  std::array<int, 2> cell_ij(int c) const { return {c % nx_, c / nx_}; }
  std::array<int, 2> vertex_ij(int v) const { return {v % (nx_ + 1), v / (nx_ + 1)}; }
  std::array<int, 2> edge_ij(int e) const;

  Point cell_center(int c) const;
  Point vertex_point(int v) const;
  Point edge_midpoint(int e) const;
  /// Unit normal of an edge: (1,0) for x-faces, (0,1) for y-faces.
  Point edge_normal(int e) const;
  double edge_length(int e) const { return is_xface(e) ? hy_ : hx_; }

  /// Edges of a cell in the order W, E, S, N.
  std::array<int, 4> cell_edges(int c) const;
  /// Corners of a cell in the order SW, SE, NE, NW.
  std::array<int, 4> cell_vertices(int c) const;
  /// Cells on either side of an edge: {left/below, right/above}; -1 outside.
  std::array<int, 2> edge_cells(int e) const;
  /// End points of an edge: {lower/left, upper/right}.
  std::array<int, 2> edge_vertices(int e) const;
  /// Cells touching a vertex (SW, SE, NW, NE); -1 outside the domain.
  std::array<int, 4> vertex_cells(int v) const;

  bool vertex_on_boundary(int v) const { return vertex_boundary_[v] != 0; }
  bool edge_on_boundary(int e) const { return edge_boundary_[e] != 0; }
  int num_boundary_edges() const { return 2 * (nx_ + ny_); }

  /// Cell containing a point (clamped to the domain).
  int locate_cell(Point p) const;

 private:
  Grid(double L, int nx, int ny);

  double L_;
  int nx_;
  int ny_;
  double hx_;
  double hy_;
  std::vector<std::uint8_t> vertex_boundary_;
  std::vector<std::uint8_t> edge_boundary_;
};

struct DofReport {
  long cells = 0;
  /// Interior-dominant count: 8N/2 for CD grids, 8N/4 for the B-grid.
  long velocity_dof = 0;
  /// Two components per velocity point, boundary points included.
  long velocity_dof_total = 0;
  /// Two components per velocity point not on the domain boundary.
  long velocity_dof_free = 0;
  /// H and A per cell.
  long tracer_dof = 0;
};

DofReport dof_counts(const Grid& grid, Staggering s);

enum class DiamondShape : std::uint8_t { Full, HalfTriangle, CornerTriangle };

/// One cell of the rotated mesh whose vertices are primal edge midpoints.
struct DiamondCell {
  DiamondShape shape = DiamondShape::Full;
  bool cell_anchored = true;
  /// Primal cell (cell_anchored) or primal vertex the diamond is centred on.
  int anchor = -1;
  /// Diamond vertices (primal edge ids) counter-clockwise; -1 pads triangles.
  std::array<int, 4> nodes{-1, -1, -1, -1};
  int num_nodes = 0;
  /// Geometric corners counter-clockwise. Corner triangles carry the primal
  /// domain corner as their third point, which is not a diamond vertex.
  std::array<Point, 4> corners{};
  int num_corners = 0;
  double area = 0.0;
};

/// Ordering: the N cell-anchored diamonds (row-major by cell), then one
/// vertex-anchored cell per primal vertex (row-major). Interior vertices give
/// full diamonds, boundary vertices half-diamond triangles and domain corners
/// quarter-diamond triangles.
struct DiamondMesh {
  std::vector<Point> vertices;
  std::vector<std::uint8_t> boundary;
  std::vector<DiamondCell> cells;
  double side = 0.0;

  int num_full() const;
  int num_triangles() const;
  double total_area() const;
};

DiamondMesh build_diamond_mesh(const Grid& grid);

}  // namespace seaice

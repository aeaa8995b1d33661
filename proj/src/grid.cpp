#include "seaice/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace seaice {

std::string_view to_string(Staggering s) {
  switch (s) {
    case Staggering::B: return "B";
    case Staggering::CD1: return "CD1";
    case Staggering::CD2: return "CD2";
  }
  return "?";
}

Staggering parse_staggering(std::string_view name) {
  if (name == "B" || name == "b") return Staggering::B;
  if (name == "CD1" || name == "cd1") return Staggering::CD1;
  if (name == "CD2" || name == "cd2") return Staggering::CD2;
  throw std::invalid_argument("unknown staggering '" + std::string(name) + "' (expected B, CD1 or CD2)");
}

Grid::Grid(double L, int nx, int ny)
    : L_(L), nx_(nx), ny_(ny), hx_(L / nx), hy_(L / ny) {
  vertex_boundary_.assign(num_vertices(), 0);
  for (int j = 0; j <= ny_; ++j)
    for (int i = 0; i <= nx_; ++i)
      if (i == 0 || j == 0 || i == nx_ || j == ny_) vertex_boundary_[vertex(i, j)] = 1;

  edge_boundary_.assign(num_edges(), 0);
  for (int j = 0; j < ny_; ++j) {
    edge_boundary_[xface(0, j)] = 1;
    edge_boundary_[xface(nx_, j)] = 1;
  }
  for (int i = 0; i < nx_; ++i) {
    edge_boundary_[yface(i, 0)] = 1;
    edge_boundary_[yface(i, ny_)] = 1;
  }
}

Grid Grid::build(double L, double h) {
  if (!(L > 0.0) || !(h > 0.0)) {
    throw std::invalid_argument("grid: L and h must be positive");
  }
  const double ratio = L / h;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-9 * ratio) {
    std::ostringstream msg;
    msg << "grid: domain length " << L << " m is not divisible by cell size " << h
        << " m (L/h = " << ratio << ")";
    throw std::invalid_argument(msg.str());
  }
  return Grid(L, static_cast<int>(n), static_cast<int>(n));
}

Grid Grid::build(double L, int nx, int ny) {
  if (!(L > 0.0) || nx < 1 || ny < 1) {
    throw std::invalid_argument("grid: need L > 0 and at least one cell per axis");
  }
  return Grid(L, nx, ny);
}

std::array<int, 2> Grid::edge_ij(int e) const {
  if (is_xface(e)) return {e % (nx_ + 1), e / (nx_ + 1)};
  const int k = e - num_xfaces();
  return {k % nx_, k / nx_};
}

Point Grid::cell_center(int c) const {
  const auto [i, j] = cell_ij(c);
  return {(i + 0.5) * hx_, (j + 0.5) * hy_};
}

Point Grid::vertex_point(int v) const {
  const auto [i, j] = vertex_ij(v);
  return {i * hx_, j * hy_};
}

Point Grid::edge_midpoint(int e) const {
  const auto [i, j] = edge_ij(e);
  if (is_xface(e)) return {i * hx_, (j + 0.5) * hy_};
  return {(i + 0.5) * hx_, j * hy_};
}

Point Grid::edge_normal(int e) const {
  return is_xface(e) ? Point{1.0, 0.0} : Point{0.0, 1.0};
}

std::array<int, 4> Grid::cell_edges(int c) const {
  const auto [i, j] = cell_ij(c);
  return {xface(i, j), xface(i + 1, j), yface(i, j), yface(i, j + 1)};
}

std::array<int, 4> Grid::cell_vertices(int c) const {
  const auto [i, j] = cell_ij(c);
  return {vertex(i, j), vertex(i + 1, j), vertex(i + 1, j + 1), vertex(i, j + 1)};
}

std::array<int, 2> Grid::edge_cells(int e) const {
  const auto [i, j] = edge_ij(e);
  if (is_xface(e)) {
    return {i > 0 ? cell(i - 1, j) : -1, i < nx_ ? cell(i, j) : -1};
  }
  return {j > 0 ? cell(i, j - 1) : -1, j < ny_ ? cell(i, j) : -1};
}

std::array<int, 2> Grid::edge_vertices(int e) const {
  const auto [i, j] = edge_ij(e);
  if (is_xface(e)) return {vertex(i, j), vertex(i, j + 1)};
  return {vertex(i, j), vertex(i + 1, j)};
}

std::array<int, 4> Grid::vertex_cells(int v) const {
  const auto [i, j] = vertex_ij(v);
  auto at = [&](int ci, int cj) {
    return (ci >= 0 && ci < nx_ && cj >= 0 && cj < ny_) ? cell(ci, cj) : -1;
  };
  return {at(i - 1, j - 1), at(i, j - 1), at(i - 1, j), at(i, j)};
}

int Grid::locate_cell(Point p) const {
  const int i = std::clamp(static_cast<int>(std::floor(p.x / hx_)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor(p.y / hy_)), 0, ny_ - 1);
  return cell(i, j);
}

DofReport dof_counts(const Grid& grid, Staggering s) {
  DofReport r;
  r.cells = grid.num_cells();
  r.tracer_dof = 2 * r.cells;
  if (s == Staggering::B) {
    r.velocity_dof = 8 * r.cells / 4;
    r.velocity_dof_total = 2L * grid.num_vertices();
    r.velocity_dof_free = 2L * (grid.nx() - 1) * (grid.ny() - 1);
  } else {
    r.velocity_dof = 8 * r.cells / 2;
    r.velocity_dof_total = 2L * grid.num_edges();
    r.velocity_dof_free = 2L * (grid.num_edges() - grid.num_boundary_edges());
  }
  return r;
}

namespace {

double polygon_area(const std::array<Point, 4>& p, int n) {
  double twice = 0.0;
  for (int k = 0; k < n; ++k) {
    const Point& a = p[k];
    const Point& b = p[(k + 1) % n];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * std::abs(twice);
}

}  // namespace

int DiamondMesh::num_full() const {
  return static_cast<int>(std::count_if(cells.begin(), cells.end(), [](const DiamondCell& c) {
    return c.shape == DiamondShape::Full;
  }));
}

int DiamondMesh::num_triangles() const {
  return static_cast<int>(cells.size()) - num_full();
}

double DiamondMesh::total_area() const {
  double a = 0.0;
  for (const auto& c : cells) a += c.area;
  return a;
}

DiamondMesh build_diamond_mesh(const Grid& grid) {
  DiamondMesh mesh;
  const int ne = grid.num_edges();
  mesh.vertices.resize(ne);
  mesh.boundary.resize(ne);
  for (int e = 0; e < ne; ++e) {
    mesh.vertices[e] = grid.edge_midpoint(e);
    mesh.boundary[e] = grid.edge_on_boundary(e) ? 1 : 0;
  }
  mesh.side = std::hypot(0.5 * grid.hx(), 0.5 * grid.hy());
  mesh.cells.reserve(grid.num_cells() + grid.num_vertices());

  for (int c = 0; c < grid.num_cells(); ++c) {
    const auto [w, e, s, n] = grid.cell_edges(c);
    DiamondCell d;
    d.shape = DiamondShape::Full;
    d.cell_anchored = true;
    d.anchor = c;
    d.nodes = {w, s, e, n};
    d.num_nodes = 4;
    for (int k = 0; k < 4; ++k) d.corners[k] = mesh.vertices[d.nodes[k]];
    d.num_corners = 4;
    d.area = polygon_area(d.corners, 4);
    mesh.cells.push_back(d);
  }

  const int nx = grid.nx();
  const int ny = grid.ny();
  for (int v = 0; v < grid.num_vertices(); ++v) {
    const auto [i, j] = grid.vertex_ij(v);
    // Counter-clockwise candidates around the vertex: W, S, E, N.
    const std::array<int, 4> cand{
        i > 0 ? grid.yface(i - 1, j) : -1,
        j > 0 ? grid.xface(i, j - 1) : -1,
        i < nx ? grid.yface(i, j) : -1,
        j < ny ? grid.xface(i, j) : -1,
    };
    DiamondCell d;
    d.cell_anchored = false;
    d.anchor = v;
    int present = 0;
    for (int k = 0; k < 4; ++k)
      if (cand[k] >= 0) d.nodes[present++] = cand[k];
    d.num_nodes = present;
    if (present == 4) {
      d.shape = DiamondShape::Full;
    } else if (present == 3) {
      d.shape = DiamondShape::HalfTriangle;
    } else {
      d.shape = DiamondShape::CornerTriangle;
    }

    int nc = 0;
    for (int k = 0; k < present; ++k) d.corners[nc++] = mesh.vertices[d.nodes[k]];
    if (d.shape == DiamondShape::CornerTriangle) d.corners[nc++] = grid.vertex_point(v);
    d.num_corners = nc;
    d.area = polygon_area(d.corners, nc);
    mesh.cells.push_back(d);
  }
  return mesh;
}

}  // namespace seaice

#include "seaice/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace seaice {

namespace {

constexpr std::array<double, 4> kRefXi{-1.0, 1.0, 1.0, -1.0};
constexpr std::array<double, 4> kRefEta{-1.0, -1.0, 1.0, 1.0};

struct QuadRule {
  std::vector<double> xi;
  std::vector<double> eta;
  std::vector<double> w;  // reference weights, summing to 4
};

QuadRule quad_rule(int n) {
  if (n == 1) return {{0.0}, {0.0}, {4.0}};
  if (n == 4) {
    const double g = 1.0 / std::sqrt(3.0);
    return {{-g, g, g, -g}, {-g, -g, g, g}, {1.0, 1.0, 1.0, 1.0}};
  }
  throw std::invalid_argument("discretization: quadrature_points must be 1 or 4");
}

// Rotated bilinear (Rannacher-Turek) basis on the reference square, node order
// W, E, S, N with nodes at the edge midpoints.
std::array<double, 4> rt_values(double xi, double eta) {
  const double q = 0.25 * (xi * xi - eta * eta);
  return {0.25 - 0.5 * xi + q, 0.25 + 0.5 * xi + q, 0.25 - 0.5 * eta - q, 0.25 + 0.5 * eta - q};
}

void rt_gradients(double xi, double eta, double hx, double hy, std::array<double, 4>& gx,
                  std::array<double, 4>& gy) {
  const double sx = 2.0 / hx;
  const double sy = 2.0 / hy;
  gx = {(-0.5 + 0.5 * xi) * sx, (0.5 + 0.5 * xi) * sx, -0.5 * xi * sx, -0.5 * xi * sx};
  gy = {-0.5 * eta * sy, -0.5 * eta * sy, (-0.5 + 0.5 * eta) * sy, (0.5 + 0.5 * eta) * sy};
}

// Linear triangle gradients; returns the (unsigned) area.
double p1_gradients(Point p0, Point p1, Point p2, std::array<double, 3>& gx, std::array<double, 3>& gy) {
  const double twice = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
  gx = {(p1.y - p2.y) / twice, (p2.y - p0.y) / twice, (p0.y - p1.y) / twice};
  gy = {(p2.x - p1.x) / twice, (p0.x - p2.x) / twice, (p1.x - p0.x) / twice};
  return 0.5 * std::abs(twice);
}

class Builder {
 public:
  Builder(Discretization& op, const QuadRule& rule) : op_(op), rule_(rule) {}

  void add_q1(const std::array<int, 4>& nodes, const std::array<Point, 4>& corners,
              std::array<int, 4> cells, int ncells) {
    double area = 0.0;
    for (std::size_t q = 0; q < rule_.w.size(); ++q) {
      std::array<double, 4> gx{};
      std::array<double, 4> gy{};
      const double det = q1_gradients(corners, rule_.xi[q], rule_.eta[q], gx, gy);
      push_qp(gx, gy, det * rule_.w[q]);
      area += det * rule_.w[q];
    }
    Point c{0.0, 0.0};
    for (const auto& p : corners) {
      c.x += 0.25 * p.x;
      c.y += 0.25 * p.y;
    }
    push_element(nodes, 4, area, c, {0.25 * area, 0.25 * area, 0.25 * area, 0.25 * area}, cells, ncells);
  }

  void add_rotated_bilinear(const std::array<int, 4>& nodes, Point center, double hx, double hy, int cell) {
    const double area = hx * hy;
    for (std::size_t q = 0; q < rule_.w.size(); ++q) {
      std::array<double, 4> gx{};
      std::array<double, 4> gy{};
      rt_gradients(rule_.xi[q], rule_.eta[q], hx, hy, gx, gy);
      push_qp(gx, gy, 0.25 * area * rule_.w[q]);
    }
    push_element(nodes, 4, area, center, {0.25 * area, 0.25 * area, 0.25 * area, 0.25 * area},
                 {cell, -1, -1, -1}, 1);
  }

  // Linear triangle on (n0, n1, n2). For a domain-corner triangle pass n2 = -1:
  // its third point carries no unknown and its velocity is zero.
  void add_p1(std::array<int, 3> n, std::array<Point, 3> p, std::array<int, 4> cells, int ncells) {
    std::array<double, 3> tgx{};
    std::array<double, 3> tgy{};
    const double area = p1_gradients(p[0], p[1], p[2], tgx, tgy);
    const int nn = n[2] >= 0 ? 3 : 2;
    std::array<double, 4> gx{};
    std::array<double, 4> gy{};
    std::array<int, 4> nodes{n[0], n[1], n[0], n[0]};
    for (int k = 0; k < nn; ++k) {
      gx[k] = tgx[k];
      gy[k] = tgy[k];
    }
    if (nn == 3) nodes[2] = n[2];
    const double per_qp = area / static_cast<double>(rule_.w.size());
    for (std::size_t q = 0; q < rule_.w.size(); ++q) push_qp(gx, gy, per_qp);
    std::array<double, 4> share{};
    for (int k = 0; k < nn; ++k) share[k] = area / nn;
    const Point c{(p[0].x + p[1].x + p[2].x) / 3.0, (p[0].y + p[1].y + p[2].y) / 3.0};
    push_element(nodes, nn, area, c, share, cells, ncells);
  }

 private:
  void push_qp(const std::array<double, 4>& gx, const std::array<double, 4>& gy, double w) {
    op_.qp_gx.push_back(gx);
    op_.qp_gy.push_back(gy);
    op_.qp_weight.push_back(w);
  }

  void push_element(const std::array<int, 4>& nodes, int nn, double area, Point c,
                    const std::array<double, 4>& share, std::array<int, 4> cells, int ncells) {
    op_.elem_nodes.push_back(nodes);
    op_.elem_num_nodes.push_back(nn);
    op_.elem_area.push_back(area);
    op_.elem_centroid.push_back(c);
    op_.elem_mass_share.push_back(share);
    op_.elem_cells.push_back(cells);
    op_.elem_num_cells.push_back(ncells);
  }

  Discretization& op_;
  const QuadRule& rule_;
};

void build_point_incidence(Discretization& op) {
  const int np = op.num_points();
  op.point_offsets.assign(np + 1, 0);
  for (int e = 0; e < op.num_elements(); ++e)
    for (int k = 0; k < op.elem_num_nodes[e]; ++k) ++op.point_offsets[op.elem_nodes[e][k] + 1];
  for (int p = 0; p < np; ++p) op.point_offsets[p + 1] += op.point_offsets[p];
  op.point_incidence.assign(op.point_offsets[np], 0);
  std::vector<int> fill(op.point_offsets.begin(), op.point_offsets.end() - 1);
  for (int e = 0; e < op.num_elements(); ++e)
    for (int k = 0; k < op.elem_num_nodes[e]; ++k)
      op.point_incidence[fill[op.elem_nodes[e][k]]++] = e * Discretization::kNodes + k;
}

void build_jump_faces(Discretization& op) {
  const Grid& g = op.grid;
  const double gp = std::sqrt(0.6);
  const std::array<double, 3> s{-gp, 0.0, gp};
  const std::array<double, 3> w{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto [lo, hi] = g.edge_cells(e);
    if (lo < 0 || hi < 0) continue;
    JumpFace f;
    f.elem_left = lo;
    f.elem_right = hi;
    const auto nl = g.cell_edges(lo);
    const auto nh = g.cell_edges(hi);
    const bool xf = g.is_xface(e);
    f.inv_h = 1.0 / (xf ? g.hx() : g.hy());
    const double len = g.edge_length(e);
    std::array<std::array<double, 8>, 3> raw{};
    for (int q = 0; q < 3; ++q) {
      // x-face: east side of `lo` (xi = 1) against west side of `hi` (xi = -1).
      const auto vl = xf ? rt_values(1.0, s[q]) : rt_values(s[q], 1.0);
      const auto vh = xf ? rt_values(-1.0, s[q]) : rt_values(s[q], -1.0);
      for (int k = 0; k < 4; ++k) {
        raw[q][k] = vl[k];
        raw[q][4 + k] = -vh[k];
      }
    }
    std::array<int, 8> all{};
    for (int k = 0; k < 4; ++k) {
      all[k] = nl[k];
      all[4 + k] = nh[k];
    }
    // Merge repeated nodes; coefficients that cancel to roundoff become zero.
    std::array<int, 8> uniq{};
    int nu = 0;
    std::array<std::array<double, 8>, 3> merged{};
    for (int k = 0; k < 8; ++k) {
      int slot = 0;
      while (slot < nu && uniq[slot] != all[k]) ++slot;
      if (slot == nu) uniq[nu++] = all[k];
      for (int q = 0; q < 3; ++q) merged[q][slot] += raw[q][k];
    }
    auto zero = [](double c) { return std::abs(c) < 1e-13; };
    int keep = 0;
    for (int k = 0; k < nu; ++k) {
      if (zero(merged[0][k]) && zero(merged[1][k]) && zero(merged[2][k])) continue;
      if (keep == JumpFace::kNodes) throw std::logic_error("cd1: unexpected jump stencil");
      f.nodes[keep] = uniq[k];
      int g = 0;
      for (int q = 0; q < 3; ++q) {
        bool any = false;
        for (int l = 0; l < nu; ++l) any = any || !zero(merged[q][l]);
        if (!any) continue;
        if (g == JumpFace::kGauss) throw std::logic_error("cd1: unexpected jump quadrature");
        f.coef[g][keep] = merged[q][k];
        f.weight[g] = 0.5 * len * w[q];
        ++g;
      }
      ++keep;
    }
    if (keep != JumpFace::kNodes) throw std::logic_error("cd1: unexpected jump stencil");
    op.jump_faces.push_back(f);
  }

  const int np = op.num_points();
  op.jump_offsets.assign(np + 1, 0);
  for (const auto& f : op.jump_faces)
    for (int n : f.nodes) ++op.jump_offsets[n + 1];
  for (int p = 0; p < np; ++p) op.jump_offsets[p + 1] += op.jump_offsets[p];
  op.jump_incidence.assign(op.jump_offsets[np], 0);
  std::vector<int> fill(op.jump_offsets.begin(), op.jump_offsets.end() - 1);
  for (int fi = 0; fi < static_cast<int>(op.jump_faces.size()); ++fi)
    for (int k = 0; k < JumpFace::kNodes; ++k)
      op.jump_incidence[fill[op.jump_faces[fi].nodes[k]]++] = fi * JumpFace::kNodes + k;
  op.jump_incidence_coef.resize(op.jump_incidence.size());
  for (std::size_t t = 0; t < op.jump_incidence.size(); ++t) {
    const JumpFace& f = op.jump_faces[op.jump_incidence[t] / JumpFace::kNodes];
    const int k = op.jump_incidence[t] % JumpFace::kNodes;
    op.jump_incidence_coef[t] = {f.coef[0][k], f.coef[1][k]};
  }
}

}  // namespace

double q1_gradients(const std::array<Point, 4>& corners, double xi, double eta,
                    std::array<double, 4>& gx, std::array<double, 4>& gy) {
  std::array<double, 4> dxi{};
  std::array<double, 4> deta{};
  double j11 = 0.0, j12 = 0.0, j21 = 0.0, j22 = 0.0;
  for (int a = 0; a < 4; ++a) {
    dxi[a] = 0.25 * kRefXi[a] * (1.0 + kRefEta[a] * eta);
    deta[a] = 0.25 * kRefEta[a] * (1.0 + kRefXi[a] * xi);
    j11 += dxi[a] * corners[a].x;
    j12 += dxi[a] * corners[a].y;
    j21 += deta[a] * corners[a].x;
    j22 += deta[a] * corners[a].y;
  }
  const double det = j11 * j22 - j12 * j21;
  for (int a = 0; a < 4; ++a) {
    gx[a] = (j22 * dxi[a] - j12 * deta[a]) / det;
    gy[a] = (-j21 * dxi[a] + j11 * deta[a]) / det;
  }
  return det;
}

Discretization Discretization::build(const Grid& grid, Staggering s, int quadrature_points) {
  Discretization op{.grid = grid};
  op.staggering = s;
  op.qp_per_element = quadrature_points;
  const QuadRule rule = quad_rule(quadrature_points);
  Builder b(op, rule);

  if (s == Staggering::B) {
    op.points.resize(grid.num_vertices());
    op.boundary.resize(grid.num_vertices());
    for (int v = 0; v < grid.num_vertices(); ++v) {
      op.points[v] = grid.vertex_point(v);
      op.boundary[v] = grid.vertex_on_boundary(v) ? 1 : 0;
    }
    for (int c = 0; c < grid.num_cells(); ++c) {
      const auto nodes = grid.cell_vertices(c);
      std::array<Point, 4> corners{};
      for (int k = 0; k < 4; ++k) corners[k] = op.points[nodes[k]];
      b.add_q1(nodes, corners, {c, -1, -1, -1}, 1);
    }
  } else {
    op.points.resize(grid.num_edges());
    op.boundary.resize(grid.num_edges());
    for (int e = 0; e < grid.num_edges(); ++e) {
      op.points[e] = grid.edge_midpoint(e);
      op.boundary[e] = grid.edge_on_boundary(e) ? 1 : 0;
    }
    if (s == Staggering::CD1) {
      for (int c = 0; c < grid.num_cells(); ++c) {
        b.add_rotated_bilinear(grid.cell_edges(c), grid.cell_center(c), grid.hx(), grid.hy(), c);
      }
    } else {
      op.diamonds = build_diamond_mesh(grid);
      for (const DiamondCell& d : op.diamonds->cells) {
        std::array<int, 4> cells{-1, -1, -1, -1};
        int ncells = 0;
        if (d.cell_anchored) {
          cells[ncells++] = d.anchor;
        } else {
          for (int c : grid.vertex_cells(d.anchor))
            if (c >= 0) cells[ncells++] = c;
        }
        switch (d.shape) {
          case DiamondShape::Full:
            b.add_q1(d.nodes, d.corners, cells, ncells);
            break;
          case DiamondShape::HalfTriangle:
            b.add_p1({d.nodes[0], d.nodes[1], d.nodes[2]}, {d.corners[0], d.corners[1], d.corners[2]},
                     cells, ncells);
            break;
          case DiamondShape::CornerTriangle:
            b.add_p1({d.nodes[0], d.nodes[1], -1}, {d.corners[0], d.corners[1], d.corners[2]}, cells,
                     ncells);
            break;
        }
      }
    }
  }
  build_point_incidence(op);
  if (s == Staggering::CD1) build_jump_faces(op);
  return op;
}

void compute_strain(const Discretization& op, std::span<const Vec2> v, std::span<StrainRate> strain) {
  const int ne = op.num_elements();
  const int nq = op.qp_per_element;
#pragma omp parallel for schedule(static)
  for (int e = 0; e < ne; ++e) {
    const auto& nodes = op.elem_nodes[e];
    const Vec2 v0 = v[nodes[0]], v1 = v[nodes[1]], v2 = v[nodes[2]], v3 = v[nodes[3]];
    for (int q = 0; q < nq; ++q) {
      const int i = e * nq + q;
      const auto& gx = op.qp_gx[i];
      const auto& gy = op.qp_gy[i];
      StrainRate s;
      s.e11 = gx[0] * v0.x + gx[1] * v1.x + gx[2] * v2.x + gx[3] * v3.x;
      s.e22 = gy[0] * v0.y + gy[1] * v1.y + gy[2] * v2.y + gy[3] * v3.y;
      s.e12 = 0.5 * (gy[0] * v0.x + gy[1] * v1.x + gy[2] * v2.x + gy[3] * v3.x +
                     gx[0] * v0.y + gx[1] * v1.y + gx[2] * v2.y + gx[3] * v3.y);
      strain[i] = s;
    }
  }
}

void stress_divergence(const Discretization& op, std::span<const Stress> sigma, std::span<Vec2> force) {
  const int np = op.num_points();
  const int nq = op.qp_per_element;
#pragma omp parallel for schedule(static)
  for (int p = 0; p < np; ++p) {
    double fx = 0.0;
    double fy = 0.0;
    for (int t = op.point_offsets[p]; t < op.point_offsets[p + 1]; ++t) {
      const int e = op.point_incidence[t] / Discretization::kNodes;
      const int k = op.point_incidence[t] % Discretization::kNodes;
      for (int q = 0; q < nq; ++q) {
        const int i = e * nq + q;
        const double w = op.qp_weight[i];
        const double gx = op.qp_gx[i][k];
        const double gy = op.qp_gy[i][k];
        const Stress& s = sigma[i];
        fx -= w * (s.s11 * gx + s.s12 * gy);
        fy -= w * (s.s12 * gx + s.s22 * gy);
      }
    }
    force[p] = {fx, fy};
  }
}

void add_cd1_stabilization(const Discretization& op, std::span<const Vec2> v,
                           std::span<const double> zeta_elem, double gamma, std::span<Vec2> force) {
  if (gamma < 0.0) throw std::invalid_argument("cd1 stabilization: gamma must be >= 0");
  if (gamma == 0.0 || op.jump_faces.empty()) return;
  const int nf = static_cast<int>(op.jump_faces.size());
  constexpr int NN = JumpFace::kNodes;
  constexpr int NG = JumpFace::kGauss;
  // Per face and Gauss point: weighted jump, already scaled by -gamma zeta/h.
  // Reused per calling thread; the parallel loops only touch it through `sc`.
  thread_local std::vector<std::array<Vec2, NG>> scaled;
  scaled.resize(nf);
  auto* sc = scaled.data();
#pragma omp parallel for schedule(static)
  for (int fi = 0; fi < nf; ++fi) {
    const JumpFace& f = op.jump_faces[fi];
    const double scale = -gamma * 0.5 * (zeta_elem[f.elem_left] + zeta_elem[f.elem_right]) * f.inv_h;
    Vec2 vn[NN];
    for (int k = 0; k < NN; ++k) vn[k] = v[f.nodes[k]];
    for (int q = 0; q < NG; ++q) {
      double jx = 0.0;
      double jy = 0.0;
      for (int k = 0; k < NN; ++k) {
        jx += f.coef[q][k] * vn[k].x;
        jy += f.coef[q][k] * vn[k].y;
      }
      const double s = scale * f.weight[q];
      sc[fi][q] = {s * jx, s * jy};
    }
  }
  const int np = op.num_points();
#pragma omp parallel for schedule(static)
  for (int p = 0; p < np; ++p) {
    double fx = 0.0;
    double fy = 0.0;
    for (int t = op.jump_offsets[p]; t < op.jump_offsets[p + 1]; ++t) {
      const auto& g = sc[op.jump_incidence[t] / NN];
      const auto& c = op.jump_incidence_coef[t];
      for (int q = 0; q < NG; ++q) {
        fx += g[q].x * c[q];
        fy += g[q].y * c[q];
      }
    }
    force[p].x += fx;
    force[p].y += fy;
  }
}

void gather_element_forces(const Discretization& op, std::span<const ElementForces> ef, std::span<Vec2> force) {
  const int np = op.num_points();
#pragma omp parallel for schedule(static)
  for (int p = 0; p < np; ++p) {
    double fx = 0.0;
    double fy = 0.0;
    for (int t = op.point_offsets[p]; t < op.point_offsets[p + 1]; ++t) {
      const Vec2& g = ef[op.point_incidence[t] >> 2][op.point_incidence[t] & 3];
      fx += g.x;
      fy += g.y;
    }
    force[p] = {fx, fy};
  }
}

std::vector<Vec2> cd1_stabilization(const Discretization& op, std::span<const Vec2> v,
                                    std::span<const double> zeta_elem, double gamma) {
  std::vector<Vec2> f(op.num_points());
  add_cd1_stabilization(op, v, zeta_elem, gamma, f);
  return f;
}

std::vector<double> element_cell_mean(const Discretization& op, std::span<const double> cell_field) {
  std::vector<double> out(op.num_elements());
  for (int e = 0; e < op.num_elements(); ++e) {
    double s = 0.0;
    for (int k = 0; k < op.elem_num_cells[e]; ++k) s += cell_field[op.elem_cells[e][k]];
    out[e] = s / op.elem_num_cells[e];
  }
  return out;
}

std::vector<double> lumped_mass(const Discretization& op, std::span<const double> cell_density) {
  const std::vector<double> dens = element_cell_mean(op, cell_density);
  std::vector<double> m(op.num_points(), 0.0);
  for (int p = 0; p < op.num_points(); ++p) {
    double s = 0.0;
    for (int t = op.point_offsets[p]; t < op.point_offsets[p + 1]; ++t) {
      const int e = op.point_incidence[t] / Discretization::kNodes;
      const int k = op.point_incidence[t] % Discretization::kNodes;
      s += op.elem_mass_share[e][k] * dens[e];
    }
    m[p] = s;
  }
  return m;
}

void apply_dirichlet(const Discretization& op, std::span<Vec2> v) {
  for (int p = 0; p < op.num_points(); ++p)
    if (op.boundary[p]) v[p] = {0.0, 0.0};
}

std::vector<double> element_shear(const Discretization& op, std::span<const StrainRate> strain) {
  const int nq = op.qp_per_element;
  std::vector<double> out(op.num_elements());
  for (int e = 0; e < op.num_elements(); ++e) {
    double s = 0.0;
    for (int q = 0; q < nq; ++q) s += shear_deformation(strain[e * nq + q]);
    out[e] = s / nq;
  }
  return out;
}

namespace reference {

void compute_strain(const Discretization& op, std::span<const Vec2> v, std::span<StrainRate> strain) {
  const int nq = op.qp_per_element;
  for (int e = 0; e < op.num_elements(); ++e) {
    for (int q = 0; q < nq; ++q) {
      const int i = e * nq + q;
      StrainRate s;
      double shear = 0.0;
      for (int k = 0; k < op.elem_num_nodes[e]; ++k) {
        const Vec2 vk = v[op.elem_nodes[e][k]];
        s.e11 += op.qp_gx[i][k] * vk.x;
        s.e22 += op.qp_gy[i][k] * vk.y;
        shear += op.qp_gy[i][k] * vk.x + op.qp_gx[i][k] * vk.y;
      }
      s.e12 = 0.5 * shear;
      strain[i] = s;
    }
  }
}

void stress_divergence(const Discretization& op, std::span<const Stress> sigma, std::span<Vec2> force) {
  std::fill(force.begin(), force.end(), Vec2{});
  const int nq = op.qp_per_element;
  for (int e = 0; e < op.num_elements(); ++e) {
    for (int q = 0; q < nq; ++q) {
      const int i = e * nq + q;
      const Stress& s = sigma[i];
      const double w = op.qp_weight[i];
      for (int k = 0; k < op.elem_num_nodes[e]; ++k) {
        Vec2& f = force[op.elem_nodes[e][k]];
        f.x -= w * (s.s11 * op.qp_gx[i][k] + s.s12 * op.qp_gy[i][k]);
        f.y -= w * (s.s12 * op.qp_gx[i][k] + s.s22 * op.qp_gy[i][k]);
      }
    }
  }
}

void add_cd1_stabilization(const Discretization& op, std::span<const Vec2> v,
                           std::span<const double> zeta_elem, double gamma, std::span<Vec2> force) {
  if (gamma < 0.0) throw std::invalid_argument("cd1 stabilization: gamma must be >= 0");
  for (const JumpFace& f : op.jump_faces) {
    const double scale = -gamma * 0.5 * (zeta_elem[f.elem_left] + zeta_elem[f.elem_right]) * f.inv_h;
    for (int q = 0; q < JumpFace::kGauss; ++q) {
      Vec2 jump;
      for (int k = 0; k < JumpFace::kNodes; ++k) {
        jump.x += f.coef[q][k] * v[f.nodes[k]].x;
        jump.y += f.coef[q][k] * v[f.nodes[k]].y;
      }
      for (int k = 0; k < JumpFace::kNodes; ++k) {
        force[f.nodes[k]].x += scale * f.weight[q] * jump.x * f.coef[q][k];
        force[f.nodes[k]].y += scale * f.weight[q] * jump.y * f.coef[q][k];
      }
    }
  }
}

}  // namespace reference

}  // namespace seaice

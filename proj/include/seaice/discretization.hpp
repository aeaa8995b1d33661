#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "seaice/grid.hpp"
#include "seaice/rheology.hpp"

namespace seaice {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Interior primal edge carrying the CD1 jump penalty. On rectangles the
/// trace of the rotated-bilinear space on an edge is quadratic and the shared
/// midpoint node cancels, so the jump depends on six nodes and vanishes at the
/// middle Gauss point; the two outer points remain. The jump at g is
/// sum_k coef[g][k] * v[nodes[k]].
struct JumpFace {
  static constexpr int kNodes = 6;
  static constexpr int kGauss = 2;
  std::array<int, kNodes> nodes{};
  std::array<std::array<double, kNodes>, kGauss> coef{};
  std::array<double, kGauss> weight{};  // Gauss weight times edge length / 2
  int elem_left = -1;
  int elem_right = -1;
  double inv_h = 0.0;              // 1 / (cell size normal to the edge)
};

/// Staggering-specific finite-element operator on a structured grid.
///
/// Every element has up to kNodes velocity nodes and qp_per_element quadrature
/// points; each point stores the basis gradients of its element's nodes.
/// Triangles pad their node list with a repeated node and zero gradient.
///   B   : bilinear quads on primal cells, nodes = cell corners
///   CD1 : rotated-bilinear nonconforming quads, nodes = edge midpoints (W,E,S,N)
///   CD2 : bilinear diamonds and boundary triangles of the diamond mesh,
///         nodes = edge midpoints (the B-grid element on the rotated mesh)
struct Discretization {
  static constexpr int kNodes = 4;

  static Discretization build(const Grid& grid, Staggering s, int quadrature_points = 1);

  Grid grid;
  Staggering staggering = Staggering::B;
  int qp_per_element = 1;

  std::vector<Point> points{};
  std::vector<std::uint8_t> boundary{};

  std::vector<std::array<int, kNodes>> elem_nodes{};
  std::vector<int> elem_num_nodes{};
  std::vector<double> elem_area{};
  std::vector<Point> elem_centroid{};
  /// Integral of each node's basis over the element (row-sum lumping).
  std::vector<std::array<double, kNodes>> elem_mass_share{};
  /// Primal cells whose tracers are averaged onto the element.
  std::vector<std::array<int, 4>> elem_cells{};
  std::vector<int> elem_num_cells{};

  std::vector<std::array<double, kNodes>> qp_gx{};
  std::vector<std::array<double, kNodes>> qp_gy{};
  std::vector<double> qp_weight{};

  /// Point -> (element*kNodes + local node) incidence, CSR.
  std::vector<int> point_offsets{};
  std::vector<int> point_incidence{};

  /// CD1 only.
  std::vector<JumpFace> jump_faces{};
  std::vector<int> jump_offsets{};
  std::vector<int> jump_incidence{};  // face*JumpFace::kNodes + local node
  std::vector<std::array<double, JumpFace::kGauss>> jump_incidence_coef{};  // coef[.][local node]

  /// CD2 only.
  std::optional<DiamondMesh> diamonds{};

  int num_points() const { return static_cast<int>(points.size()); }
  int num_elements() const { return static_cast<int>(elem_nodes.size()); }
  int num_qp() const { return num_elements() * qp_per_element; }
  bool on_boundary(int p) const { return boundary[p] != 0; }
};

/// Basis gradients of the isoparametric bilinear quad at reference (xi, eta).
/// Corners are counter-clockwise, the first one mapping to (-1,-1). Returns det J.
double q1_gradients(const std::array<Point, 4>& corners, double xi, double eta,
                    std::array<double, 4>& gx, std::array<double, 4>& gy);

// Kernels. Parallel over elements (strain) or points (gather assembly); the
// summation order per output entry is fixed, so results do not depend on the
// thread count.

void compute_strain(const Discretization& op, std::span<const Vec2> v, std::span<StrainRate> strain);

/// Weak-form assembly f_i = -sum_q w_q sigma_q : eps(phi_i). No boundary rows are touched.
void stress_divergence(const Discretization& op, std::span<const Stress> sigma, std::span<Vec2> force);

/// Edge-jump penalty -gamma sum_e zeta_e/h int_e [v].[phi_i], added into `force`.
/// zeta_elem is the element-mean bulk viscosity. Throws for gamma < 0.
void add_cd1_stabilization(const Discretization& op, std::span<const Vec2> v,
                           std::span<const double> zeta_elem, double gamma, std::span<Vec2> force);

/// Nodal forces of each element, gathered into points in incidence order.
using ElementForces = std::array<Vec2, Discretization::kNodes>;
void gather_element_forces(const Discretization& op, std::span<const ElementForces> ef, std::span<Vec2> force);

std::vector<Vec2> cd1_stabilization(const Discretization& op, std::span<const Vec2> v,
                                    std::span<const double> zeta_elem, double gamma);

/// Row-sum lumped mass of a cellwise density (e.g. rho_ice*H); pass ones for the lumped area.
std::vector<double> lumped_mass(const Discretization& op, std::span<const double> cell_density);

/// Mean over the cells mapped onto each element.
std::vector<double> element_cell_mean(const Discretization& op, std::span<const double> cell_field);

void apply_dirichlet(const Discretization& op, std::span<Vec2> v);

/// Mean over quadrature points of the shear deformation, one value per element.
std::vector<double> element_shear(const Discretization& op, std::span<const StrainRate> strain);

/// Serial element-by-element scatter versions kept as the reference the
/// parallel kernels are tested and benchmarked against.
namespace reference {
void compute_strain(const Discretization& op, std::span<const Vec2> v, std::span<StrainRate> strain);
void stress_divergence(const Discretization& op, std::span<const Stress> sigma, std::span<Vec2> force);
void add_cd1_stabilization(const Discretization& op, std::span<const Vec2> v,
                           std::span<const double> zeta_elem, double gamma, std::span<Vec2> force);
}  // namespace reference

}  // namespace seaice

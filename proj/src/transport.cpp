#include "seaice/transport.hpp"

#include <algorithm>
#include <sstream>
#include <string>

namespace seaice {

namespace {

std::string cfl_message(double ratio) {
  std::ostringstream m;
  m << "upwind_step: CFL condition violated (Courant number " << ratio << " > 1)";
  return m.str();
}

// Donor-cell flux of q through every edge; zero on the domain boundary.
std::vector<double> face_fluxes(const Grid& g, std::span<const double> faces, std::span<const double> q) {
  const int ne = g.num_edges();
  std::vector<double> flux(ne, 0.0);
#pragma omp parallel for schedule(static)
  for (int e = 0; e < ne; ++e) {
    const auto [lo, hi] = g.edge_cells(e);
    if (lo < 0 || hi < 0) continue;
    const double u = faces[e];
    flux[e] = u * g.edge_length(e) * (u > 0.0 ? q[lo] : q[hi]);
  }
  return flux;
}

void apply_fluxes(const Grid& g, std::span<const double> flux, double dt, std::span<double> q) {
  const int nc = g.num_cells();
  const double s = dt / g.cell_area();
#pragma omp parallel for schedule(static)
  for (int c = 0; c < nc; ++c) {
    const auto [w, e, so, n] = g.cell_edges(c);
    q[c] -= s * (flux[e] - flux[w] + flux[n] - flux[so]);
  }
}

}  // namespace

CflViolation::CflViolation(double ratio) : std::invalid_argument(cfl_message(ratio)), ratio_(ratio) {}

std::vector<double> face_normal_velocity(const Discretization& op, std::span<const Vec2> v) {
  const Grid& g = op.grid;
  std::vector<double> u(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) {
    const bool xf = g.is_xface(e);
    if (op.staggering == Staggering::B) {
      const auto [a, b] = g.edge_vertices(e);
      u[e] = xf ? 0.5 * (v[a].x + v[b].x) : 0.5 * (v[a].y + v[b].y);
    } else {
      u[e] = xf ? v[e].x : v[e].y;
    }
  }
  return u;
}

double courant_number(const Grid& g, std::span<const double> faces, double dt) {
  double worst = 0.0;
  for (int c = 0; c < g.num_cells(); ++c) {
    const auto [w, e, s, n] = g.cell_edges(c);
    double out = 0.0;
    auto add = [&](int edge, double sign) {
      if (g.edge_on_boundary(edge)) return;
      out += std::max(sign * faces[edge], 0.0) * g.edge_length(edge);
    };
    add(w, -1.0);
    add(e, 1.0);
    add(s, -1.0);
    add(n, 1.0);
    worst = std::max(worst, out * dt / g.cell_area());
  }
  return worst;
}

std::vector<double> flux_divergence(const Grid& g, std::span<const double> faces) {
  const std::vector<double> ones(g.num_cells(), 1.0);
  const std::vector<double> flux = face_fluxes(g, faces, ones);
  std::vector<double> div(g.num_cells());
  for (int c = 0; c < g.num_cells(); ++c) {
    const auto [w, e, s, n] = g.cell_edges(c);
    div[c] = flux[e] - flux[w] + flux[n] - flux[s];
  }
  return div;
}

TracerFields upwind_step(const TracerFields& t, std::span<const double> faces, const Grid& grid, double dt) {
  const double cr = courant_number(grid, faces, dt);
  if (cr > 1.0) throw CflViolation(cr);
  TracerFields out = t;
  apply_fluxes(grid, face_fluxes(grid, faces, t.H), dt, out.H);
  apply_fluxes(grid, face_fluxes(grid, faces, t.A), dt, out.A);
  for (double& a : out.A) a = std::clamp(a, 0.0, 1.0);
  return out;
}

}  // namespace seaice

#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "seaice/discretization.hpp"
#include "seaice/grid.hpp"

namespace seaice {

struct TracerFields {
  std::vector<double> H;  // m
  std::vector<double> A;  // fraction
};

/// Normal speed on every primal edge (m/s, positive along the edge normal).
/// B: mean of the two end-vertex velocities. CD1/CD2: the edge-midpoint value.
std::vector<double> face_normal_velocity(const Discretization& op, std::span<const Vec2> v);

/// Largest per-cell outflow Courant number sum_out(u len) dt / area.
/// Boundary faces carry no flux and are ignored.
double courant_number(const Grid& grid, std::span<const double> faces, double dt);

class CflViolation : public std::invalid_argument {
 public:
  CflViolation(double ratio);
  double ratio() const { return ratio_; }

 private:
  double ratio_;
};

/// Net outward volume flux per cell (m^2/s) for a unit tracer.
std::vector<double> flux_divergence(const Grid& grid, std::span<const double> faces);

/// Donor-cell update of H and A with closed boundaries, then A clamped to [0,1].
/// Throws CflViolation if courant_number > 1.
TracerFields upwind_step(const TracerFields& t, std::span<const double> faces, const Grid& grid, double dt);

}  // namespace seaice

#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "seaice/discretization.hpp"
#include "seaice/rheology.hpp"

namespace seaice {

enum class Scheme { Picard, EVP, MEVP };

std::string_view to_string(Scheme s);
Scheme parse_scheme(std::string_view name);

struct SolverConfig {
  Scheme scheme = Scheme::MEVP;
  int n_sub = 100;
  double T_evp = 1500.0;     // s
  double alpha = 500.0;
  double beta = 500.0;
  double picard_tol = 1e-6;  // relative nonlinear residual
  int picard_max = 500;
  double linear_tol = 1e-9;
  /// Picard inner solver. "ldlt" factors the symmetric viscous operator with
  /// Coriolis lagged; "lu" keeps Coriolis implicit; "bicgstab" is diagonally
  /// preconditioned, to linear_tol.
  std::string linear_solver = "ldlt";
  double cd1_gamma = 1.0;
  /// Anderson mixing depth for the Picard iteration; 0 is plain Picard.
  int picard_anderson = 0;

  /// Defaults per scheme: 500 subcycles for EVP, 100 for mEVP.
  static SolverConfig defaults(Scheme s);
  void validate() const;
};

struct ForcingParams {
  double f_c = 1.46e-4;   // 1/s
  double rho_a = 1.3;     // kg/m^3
  double C_a = 1.2e-3;
  double rho_o = 1026.0;  // kg/m^3
  double C_o = 5.5e-3;
  double g = 9.81;        // m/s^2
};

/// Forcing sampled at the velocity points of a discretization.
struct Forcing {
  ForcingParams params;
  std::vector<Vec2> wind;   // m/s
  std::vector<Vec2> ocean;  // m/s
  /// -g grad(sea-surface height), m/s^2. Empty means zero.
  std::vector<Vec2> tilt;
};

/// Zero wind, ocean and tilt on every point of `op`.
Forcing zero_forcing(const Discretization& op, const ForcingParams& p = {});

/// -g grad(ssh) from a sea-surface height given at the velocity points, by
/// the lumped weak gradient of the discretization.
std::vector<Vec2> surface_tilt(const Discretization& op, std::span<const double> ssh, double g);

/// tau = rho_a C_a |w| w + rho_o C_o |v_o - v| (v_o - v), N/m^2.
Vec2 surface_stress(Vec2 v, Vec2 wind, Vec2 ocean, const ForcingParams& p);

struct State {
  std::vector<Vec2> v;        // velocity points
  std::vector<Stress> sigma;  // quadrature points (EVP and mEVP memory)
  std::vector<double> H;      // cells
  std::vector<double> A;      // cells
};

State make_state(const Discretization& op);

struct SolveReport {
  Scheme scheme = Scheme::MEVP;
  int iterations = 0;
  /// Picard: final relative residual. EVP/mEVP: relative change of v over the last iteration.
  double residual = 0.0;
  bool converged = true;
  std::vector<double> history;
};

class SolverBlowup : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tracer-dependent coefficients of one outer step.
struct StepCoefficients {
  std::vector<double> mass;      // lumped rho_ice H, floored, kg
  std::vector<double> ice_area;  // lumped A, m^2
  std::vector<double> elem_P0;   // N/m
};

StepCoefficients step_coefficients(const Discretization& op, std::span<const double> H,
                                   std::span<const double> A, const RheoParams& rheo);

/// Residual of the implicit VP step at velocity v, per point (zero on the boundary):
///   M(v - v_n)/dt + M f e_z x v - div sigma_VP(v) - S(v) - A tau(v) - M tilt
/// S is the CD1 stabilization (other staggerings: none).
std::vector<Vec2> vp_residual(const Discretization& op, const State& state, const Forcing& forcing,
                              double dt, const SolverConfig& cfg, const RheoParams& rheo,
                              std::span<const Vec2> v);

SolveReport picard_vp_solve(const Discretization& op, State& state, const Forcing& forcing, double dt,
                            const SolverConfig& cfg, const RheoParams& rheo);
SolveReport evp_solve(const Discretization& op, State& state, const Forcing& forcing, double dt,
                      const SolverConfig& cfg, const RheoParams& rheo);
/// `initial` (optional) replaces state.v as the first iterate; state.v stays v_n.
SolveReport mevp_solve(const Discretization& op, State& state, const Forcing& forcing, double dt,
                       const SolverConfig& cfg, const RheoParams& rheo,
                       std::span<const Vec2> initial = {});

/// Dispatch on cfg.scheme.
SolveReport momentum_step(const Discretization& op, State& state, const Forcing& forcing, double dt,
                          const SolverConfig& cfg, const RheoParams& rheo);

/// Per-quadrature-point strain and rheology for a velocity field.
void evaluate_rheology(const Discretization& op, std::span<const Vec2> v, std::span<const double> elem_P0,
                       const RheoParams& rheo, std::span<StrainRate> eps, std::span<RheologyEval> r);

}  // namespace seaice

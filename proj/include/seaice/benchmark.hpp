#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "seaice/discretization.hpp"
#include "seaice/grid.hpp"
#include "seaice/momentum.hpp"
#include "seaice/rheology.hpp"

namespace seaice {

/// Convergent cyclonic vortex translating on a straight line from c0 (t = 0)
/// to c1 (t = T_end). Positions in m, speeds in m/s.
struct CycloneParams {
  Point c0{51.2e3, 51.2e3};
  Point c1{460.8e3, 460.8e3};
  double v_max = 15.0;
  double r_scale = 100e3;
  double alpha_conv_deg = 18.0;
};

struct BenchmarkConfig {
  double L = 512e3;
  double h = 8e3;
  /// Cell counts; 0 means L/h. A non-square subdivision is allowed (same-dof runs).
  int nx = 0;
  int ny = 0;
  double T_end = 2.0 * 86400.0;
  double dt = 120.0;
  /// Snapshot interval in steps; 0 writes only the final state.
  int output_every = 720;
  Staggering staggering = Staggering::B;
  int quadrature_points = 1;
  SolverConfig solver;
  RheoParams rheo;
  ForcingParams forcing;
  CycloneParams cyclone;
  double ocean_vmax = 0.01;
  bool wind_on = true;
  bool ocean_on = true;

  int num_steps() const;
  Grid make_grid() const;
  void validate() const;
};

/// A = 1, H = 0.3 + 0.005 (sin(6e-5 x) + sin(3e-5 y)) at cell centres, v = 0, sigma = 0.
State initial_state(const Discretization& op);

Point cyclone_center(double t, const CycloneParams& p, double T_end);
Vec2 wind_field(Point x, double t, const CycloneParams& p, double T_end);
Vec2 ocean_field(Point x, double L, double vmax);

Forcing benchmark_forcing(const Discretization& op, const BenchmarkConfig& cfg, double t);

double total_volume(const Grid& grid, std::span<const double> H);

struct StepTelemetry {
  int step = 0;
  double time = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool converged = true;
  double max_speed = 0.0;
  double volume = 0.0;
  double min_H = 0.0;
  double min_A = 0.0;
  double max_A = 0.0;
  double courant = 0.0;
};

struct Snapshot {
  int step = 0;
  double time = 0.0;
  const State* state = nullptr;
  std::span<const double> shear;  // per element, 1/s
};

struct RunResult {
  State final_state;
  std::vector<double> final_shear;
  std::vector<StepTelemetry> telemetry;
  double initial_volume = 0.0;
  double max_volume_drift = 0.0;  // relative, over all steps
  double max_speed = 0.0;
  bool bounds_ok = true;          // H >= 0 and A in [0,1] at every step
  double wall_time_s = 0.0;
};

/// Solver blow-up or CFL failure during a run. Carries the last good state.
class BenchmarkFailure : public std::runtime_error {
 public:
  BenchmarkFailure(const std::string& what, int step, State last_good)
      : std::runtime_error(what), step_(step), last_good_(std::move(last_good)) {}
  int step() const { return step_; }
  const State& last_good() const { return last_good_; }

 private:
  int step_;
  State last_good_;
};

using SnapshotObserver = std::function<void(const Snapshot&)>;

/// Per-element shear deformation of a velocity field.
std::vector<double> shear_field(const Discretization& op, std::span<const Vec2> v);

/// Time loop: momentum solve, upwind transport, snapshots on schedule and at the end.
RunResult run_benchmark(const BenchmarkConfig& cfg, const Discretization& op,
                        const SnapshotObserver& observer = {});
RunResult run_benchmark(const BenchmarkConfig& cfg, const SnapshotObserver& observer = {});

}  // namespace seaice

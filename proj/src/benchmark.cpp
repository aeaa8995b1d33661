#include "seaice/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "seaice/transport.hpp"

namespace seaice {

int BenchmarkConfig::num_steps() const { return static_cast<int>(std::lround(T_end / dt)); }

Grid BenchmarkConfig::make_grid() const {
  if (nx > 0 || ny > 0) return Grid::build(L, nx > 0 ? nx : ny, ny > 0 ? ny : nx);
  return Grid::build(L, h);
}

void BenchmarkConfig::validate() const {
  if (!(dt > 0.0) || !(T_end > 0.0)) throw std::invalid_argument("benchmark: dt and T_end must be positive");
  const double steps = T_end / dt;
  if (std::abs(steps - std::round(steps)) > 1e-9 * steps)
    throw std::invalid_argument("benchmark: T_end must be an integer multiple of dt");
  if (output_every < 0) throw std::invalid_argument("benchmark: output_every must be >= 0");
  if (quadrature_points != 1 && quadrature_points != 4)
    throw std::invalid_argument("benchmark: quadrature_points must be 1 or 4");
  if (!(cyclone.v_max > 0.0) || !(cyclone.r_scale > 0.0))
    throw std::invalid_argument("benchmark: cyclone v_max and r_scale must be positive");
  if (forcing.C_a < 0.0 || forcing.C_o < 0.0) throw std::invalid_argument("benchmark: drag coefficients must be >= 0");
  make_grid();
  solver.validate();
  rheo.validate();
}

State initial_state(const Discretization& op) {
  State s = make_state(op);
  for (int c = 0; c < op.grid.num_cells(); ++c) {
    const Point x = op.grid.cell_center(c);
    s.H[c] = 0.3 + 0.005 * (std::sin(6e-5 * x.x) + std::sin(3e-5 * x.y));
    s.A[c] = 1.0;
  }
  return s;
}

Point cyclone_center(double t, const CycloneParams& p, double T_end) {
  const double f = t / T_end;
  return {p.c0.x + f * (p.c1.x - p.c0.x), p.c0.y + f * (p.c1.y - p.c0.y)};
}

Vec2 wind_field(Point x, double t, const CycloneParams& p, double T_end) {
  const Point c = cyclone_center(t, p, T_end);
  const double rx = x.x - c.x;
  const double ry = x.y - c.y;
  const double r = std::hypot(rx, ry);
  if (r == 0.0) return {};
  const double s = r / p.r_scale;
  const double mag = p.v_max * s * std::exp(1.0 - s);
  const double ang = std::numbers::pi / 180.0 * (90.0 + p.alpha_conv_deg);
  const double ca = std::cos(ang);
  const double sa = std::sin(ang);
  const double ux = rx / r;
  const double uy = ry / r;
  return {mag * (ca * ux - sa * uy), mag * (sa * ux + ca * uy)};
}

Vec2 ocean_field(Point x, double L, double vmax) {
  return {vmax * (2.0 * x.y - L) / L, vmax * (L - 2.0 * x.x) / L};
}

Forcing benchmark_forcing(const Discretization& op, const BenchmarkConfig& cfg, double t) {
  Forcing f = zero_forcing(op, cfg.forcing);
  for (int p = 0; p < op.num_points(); ++p) {
    if (cfg.wind_on) f.wind[p] = wind_field(op.points[p], t, cfg.cyclone, cfg.T_end);
    if (cfg.ocean_on) f.ocean[p] = ocean_field(op.points[p], op.grid.length(), cfg.ocean_vmax);
  }
  return f;
}

double total_volume(const Grid& grid, std::span<const double> H) {
  double s = 0.0;
  for (double h : H) s += h;
  return s * grid.cell_area();
}

std::vector<double> shear_field(const Discretization& op, std::span<const Vec2> v) {
  std::vector<StrainRate> eps(op.num_qp());
  compute_strain(op, v, eps);
  return element_shear(op, eps);
}

RunResult run_benchmark(const BenchmarkConfig& cfg, const Discretization& op, const SnapshotObserver& observer) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const Grid& grid = op.grid;
  RunResult res;
  State state = initial_state(op);
  res.initial_volume = total_volume(grid, state.H);
  const int steps = cfg.num_steps();
  res.telemetry.reserve(steps);

  auto emit = [&](int step) {
    if (!observer) return;
    const std::vector<double> shear = shear_field(op, state.v);
    observer(Snapshot{step, step * cfg.dt, &state, shear});
  };
  for (int n = 0; n < steps; ++n) {
    const double t = n * cfg.dt;
    State last = state;
    StepTelemetry tel;
    tel.step = n + 1;
    tel.time = t + cfg.dt;
    try {
      const Forcing forcing = benchmark_forcing(op, cfg, t);
      const SolveReport rep = momentum_step(op, state, forcing, cfg.dt, cfg.solver, cfg.rheo);
      tel.iterations = rep.iterations;
      tel.residual = rep.residual;
      tel.converged = rep.converged;
      const std::vector<double> faces = face_normal_velocity(op, state.v);
      tel.courant = courant_number(grid, faces, cfg.dt);
      TracerFields tr = upwind_step({state.H, state.A}, faces, grid, cfg.dt);
      state.H = std::move(tr.H);
      state.A = std::move(tr.A);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "step " << n + 1 << " (t = " << t << " s): " << e.what();
      throw BenchmarkFailure(msg.str(), n + 1, std::move(last));
    }
    for (const Vec2& v : state.v) tel.max_speed = std::max(tel.max_speed, std::hypot(v.x, v.y));
    tel.volume = total_volume(grid, state.H);
    tel.min_H = *std::min_element(state.H.begin(), state.H.end());
    tel.min_A = *std::min_element(state.A.begin(), state.A.end());
    tel.max_A = *std::max_element(state.A.begin(), state.A.end());
    if (tel.min_H < 0.0 || tel.min_A < 0.0 || tel.max_A > 1.0) res.bounds_ok = false;
    res.max_speed = std::max(res.max_speed, tel.max_speed);
    res.max_volume_drift =
        std::max(res.max_volume_drift, std::abs(tel.volume - res.initial_volume) / res.initial_volume);
    res.telemetry.push_back(tel);
    if ((cfg.output_every > 0 && (n + 1) % cfg.output_every == 0) || n + 1 == steps) emit(n + 1);
  }
  res.final_shear = shear_field(op, state.v);
  res.final_state = std::move(state);
  res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

RunResult run_benchmark(const BenchmarkConfig& cfg, const SnapshotObserver& observer) {
  const Discretization op = Discretization::build(cfg.make_grid(), cfg.staggering, cfg.quadrature_points);
  return run_benchmark(cfg, op, observer);
}

}  // namespace seaice

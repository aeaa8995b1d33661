#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "seaice/benchmark.hpp"

using namespace seaice;

namespace {

BenchmarkConfig short_run(Staggering s, int n, double hours, Scheme sch = Scheme::MEVP) {
  BenchmarkConfig b;
  b.staggering = s;
  b.nx = b.ny = n;
  b.h = b.L / n;
  b.T_end = hours * 3600.0;
  b.output_every = 0;
  b.solver = SolverConfig::defaults(sch);
  return b;
}

double max_of(const std::vector<double>& x) { return *std::max_element(x.begin(), x.end()); }

}  // namespace

TEST_CASE("initial state") {
  const Discretization op = Discretization::build(Grid::build(512e3, 8e3), Staggering::B);
  const State s = initial_state(op);
  double sum = 0.0;
  for (int c = 0; c < op.grid.num_cells(); ++c) {
    CHECK(s.A[c] == 1.0);
    CHECK(s.H[c] >= 0.29);
    CHECK(s.H[c] <= 0.31);
    sum += s.H[c];
  }
  const double mean = sum / op.grid.num_cells();
  CHECK(std::abs(total_volume(op.grid, s.H) - mean * 512e3 * 512e3) <= 1e-12 * mean * 512e3 * 512e3);
  for (const auto& v : s.v) CHECK((v.x == 0.0 && v.y == 0.0));
}

TEST_CASE("cyclone wind") {
  const CycloneParams p;
  const double T = 2 * 86400.0;
  const Point c0 = cyclone_center(0.0, p, T);
  const Point c1 = cyclone_center(T, p, T);
  CHECK(c0.x == 51.2e3);
  CHECK(c1.y == doctest::Approx(460.8e3));
  const double t = 0.37 * T;
  const Point c = cyclone_center(t, p, T);
  CHECK(c.x == doctest::Approx(c.y));  // the diagonal
  const Vec2 w0 = wind_field(c, t, p, T);
  CHECK(w0.x == 0.0);
  CHECK(w0.y == 0.0);
  for (double ang = 0.0; ang < 6.28; ang += 0.3) {
    const Point x{c.x + p.r_scale * std::cos(ang), c.y + p.r_scale * std::sin(ang)};
    const Vec2 w = wind_field(x, t, p, T);
    CHECK(std::hypot(w.x, w.y) == doctest::Approx(p.v_max).epsilon(1e-12));
    // cyclonic (anticlockwise) with inflow at the convergence angle
    const double rx = std::cos(ang), ry = std::sin(ang);
    const double radial = w.x * rx + w.y * ry;
    const double tangential = -w.x * ry + w.y * rx;
    CHECK(tangential > 0.0);
    CHECK(radial < 0.0);
    CHECK(std::atan2(-radial, tangential) * 180.0 / std::numbers::pi == doctest::Approx(p.alpha_conv_deg));
  }
  // |wind| depends on the distance only, peaking at r_scale
  const double r1 = 60e3, r2 = 250e3;
  const Vec2 a = wind_field({c.x + r1, c.y}, t, p, T);
  const Vec2 b = wind_field({c.x, c.y - r1}, t, p, T);
  CHECK(std::hypot(a.x, a.y) == doctest::Approx(std::hypot(b.x, b.y)));
  const Vec2 far = wind_field({c.x + r2, c.y}, t, p, T);
  CHECK(std::hypot(far.x, far.y) < p.v_max);
  CHECK(std::hypot(a.x, a.y) < p.v_max);
}

TEST_CASE("ocean current") {
  const double L = 512e3;
  const Vec2 c = ocean_field({L / 2, L / 2}, L, 0.01);
  CHECK(c.x == 0.0);
  CHECK(c.y == 0.0);
  const Vec2 o = ocean_field({0.0, 0.0}, L, 0.01);
  CHECK(o.x == doctest::Approx(-0.01));
  CHECK(o.y == doctest::Approx(0.01));
  // divergence of the analytic field by central differences
  const double d = 1.0;
  const Point x{123e3, 321e3};
  const double div = (ocean_field({x.x + d, x.y}, L, 0.01).x - ocean_field({x.x - d, x.y}, L, 0.01).x +
                      ocean_field({x.x, x.y + d}, L, 0.01).y - ocean_field({x.x, x.y - d}, L, 0.01).y) /
                     (2 * d);
  CHECK(std::abs(div) < 1e-15);
}

TEST_CASE("config validation") {
  BenchmarkConfig b;
  CHECK(b.num_steps() == 1440);
  CHECK_NOTHROW(b.validate());
  b.dt = 7.0;
  CHECK_THROWS_AS(b.validate(), std::invalid_argument);
  b = {};
  b.h = 3e3;
  CHECK_THROWS_AS(b.validate(), std::invalid_argument);
  b = {};
  b.cyclone.r_scale = 0.0;
  CHECK_THROWS_AS(b.validate(), std::invalid_argument);
}

TEST_CASE("no forcing leaves the initial state untouched") {
  for (Staggering s : {Staggering::B, Staggering::CD1, Staggering::CD2}) {
    BenchmarkConfig b = short_run(s, 16, 1.0);
    b.wind_on = false;
    b.ocean_on = false;
    const Discretization op = Discretization::build(b.make_grid(), s);
    const RunResult r = run_benchmark(b, op);
    const State s0 = initial_state(op);
    for (int c = 0; c < op.grid.num_cells(); ++c) {
      CHECK(std::abs(r.final_state.H[c] - s0.H[c]) <= 1e-12);
      CHECK(r.final_state.A[c] == s0.A[c]);
    }
    CHECK(max_of(r.final_shear) == 0.0);
    CHECK(r.max_speed == 0.0);
  }
}

TEST_CASE("short runs conserve volume, keep bounds and stay slow") {
  for (Staggering s : {Staggering::B, Staggering::CD1, Staggering::CD2}) {
    CAPTURE(to_string(s));
    const BenchmarkConfig b = short_run(s, 16, 6.0);
    const RunResult r = run_benchmark(b);
    CHECK(r.telemetry.size() == 180u);
    CHECK(r.max_volume_drift <= 1e-10);
    CHECK(r.bounds_ok);
    CHECK(r.max_speed > 0.0);
    CHECK(r.max_speed < 2 * b.cyclone.v_max + 1.0);
    for (const auto& t : r.telemetry) CHECK(t.courant <= 1.0);
  }
}

TEST_CASE("snapshots follow the output schedule") {
  BenchmarkConfig b = short_run(Staggering::CD2, 8, 1.0);
  b.output_every = 10;
  std::vector<int> steps;
  run_benchmark(b, [&](const Snapshot& s) {
    steps.push_back(s.step);
    CHECK(s.state != nullptr);
    CHECK(s.time == doctest::Approx(s.step * b.dt));
  });
  CHECK(steps == std::vector<int>{10, 20, 30});
}

TEST_CASE("near-rigid ice barely deforms") {
  // implicit solver: explicit subcycling with fixed alpha, beta is not stable
  // for a million-fold stiffer ice
  BenchmarkConfig b = short_run(Staggering::B, 16, 6.0, Scheme::Picard);
  b.solver.picard_max = 20;
  b.solver.picard_anderson = 5;
  BenchmarkConfig rigid = b;
  rigid.rheo.P_star *= 1e6;
  const double def = max_of(run_benchmark(b).final_shear);
  const double hard = max_of(run_benchmark(rigid).final_shear);
  CHECK(hard < 0.1 * def);
}

TEST_CASE("repeated runs are identical") {
  const BenchmarkConfig b = short_run(Staggering::CD1, 16, 1.0);
  const RunResult a = run_benchmark(b);
  const RunResult c = run_benchmark(b);
  CHECK(a.final_state.H == c.final_state.H);
  CHECK(a.final_shear == c.final_shear);
#ifdef _OPENMP
  const int threads = omp_get_max_threads();
  omp_set_num_threads(1);
  const RunResult serial = run_benchmark(b);
  omp_set_num_threads(std::max(2, threads));
  const RunResult parallel = run_benchmark(b);
  omp_set_num_threads(threads);
  for (std::size_t i = 0; i < serial.final_shear.size(); ++i)
    CHECK(std::abs(serial.final_shear[i] - parallel.final_shear[i]) <= 1e-13 * max_of(serial.final_shear));
  for (std::size_t i = 0; i < serial.final_state.v.size(); ++i) {
    CHECK(std::abs(serial.final_state.v[i].x - parallel.final_state.v[i].x) <= 1e-13);
    CHECK(std::abs(serial.final_state.v[i].y - parallel.final_state.v[i].y) <= 1e-13);
  }
#endif
}

TEST_CASE("solver blow-up is reported with the step") {
  BenchmarkConfig b = short_run(Staggering::B, 8, 1.0);
  b.dt = 3600.0;  // far beyond the transport CFL for a strong wind
  b.T_end = 3600.0 * 4;
  b.cyclone.v_max = 3000.0;
  try {
    run_benchmark(b);
    FAIL("expected a failure");
  } catch (const BenchmarkFailure& e) {
    CHECK(e.step() >= 1);
    CHECK(std::string(e.what()).find("step") != std::string::npos);
    CHECK(e.last_good().H.size() == 64u);
  }
}

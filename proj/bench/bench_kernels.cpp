// Serial reference kernels against the OpenMP ones, and one mEVP step per
// staggering. OMP_NUM_THREADS sets the thread count of the parallel kernels.
//
//   bench_kernels --benchmark_filter=strain

#include <benchmark/benchmark.h>

#include <random>

#include "seaice/benchmark.hpp"
#include "seaice/momentum.hpp"

using namespace seaice;

namespace {

Staggering stag(int k) { return static_cast<Staggering>(k); }

struct Fixture {
  Discretization op;
  std::vector<Vec2> v;
  std::vector<StrainRate> eps;
  std::vector<Stress> sigma;
  std::vector<double> zeta;
  std::vector<Vec2> force;

  Fixture(Staggering s, int n) : op(Discretization::build(Grid::build(512e3, n, n), s)) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 0.1);
    v.resize(op.num_points());
    for (auto& x : v) x = {g(rng), g(rng)};
    eps.resize(op.num_qp());
    sigma.resize(op.num_qp());
    for (auto& x : sigma) x = {1e3 * g(rng), 1e3 * g(rng), 1e3 * g(rng)};
    zeta.assign(op.num_elements(), 1e8);
    force.resize(op.num_points());
  }
};

void args(benchmark::internal::Benchmark* b) {
  for (int s = 0; s < 3; ++s)
    for (int n : {64, 128}) b->Args({s, n});
}

void strain_reference(benchmark::State& st) {
  Fixture f(stag(st.range(0)), st.range(1));
  for (auto _ : st) reference::compute_strain(f.op, f.v, f.eps);
  st.SetLabel(std::string(to_string(f.op.staggering)));
}
void strain_parallel(benchmark::State& st) {
  Fixture f(stag(st.range(0)), st.range(1));
  for (auto _ : st) compute_strain(f.op, f.v, f.eps);
  st.SetLabel(std::string(to_string(f.op.staggering)));
}
void divergence_reference(benchmark::State& st) {
  Fixture f(stag(st.range(0)), st.range(1));
  for (auto _ : st) reference::stress_divergence(f.op, f.sigma, f.force);
  st.SetLabel(std::string(to_string(f.op.staggering)));
}
void divergence_parallel(benchmark::State& st) {
  Fixture f(stag(st.range(0)), st.range(1));
  for (auto _ : st) stress_divergence(f.op, f.sigma, f.force);
  st.SetLabel(std::string(to_string(f.op.staggering)));
}
void stabilization_reference(benchmark::State& st) {
  Fixture f(Staggering::CD1, st.range(0));
  for (auto _ : st) reference::add_cd1_stabilization(f.op, f.v, f.zeta, 1.0, f.force);
}
void stabilization_parallel(benchmark::State& st) {
  Fixture f(Staggering::CD1, st.range(0));
  for (auto _ : st) add_cd1_stabilization(f.op, f.v, f.zeta, 1.0, f.force);
}

// One benchmark time step (100 mEVP subcycles) from the initial state.
void mevp_step(benchmark::State& st) {
  BenchmarkConfig cfg;
  cfg.staggering = stag(st.range(0));
  cfg.h = 512e3 / st.range(1);
  const Discretization op = Discretization::build(cfg.make_grid(), cfg.staggering);
  const State s0 = initial_state(op);
  const Forcing forcing = benchmark_forcing(op, cfg, 3600.0);
  for (auto _ : st) {
    State s = s0;
    mevp_solve(op, s, forcing, cfg.dt, cfg.solver, cfg.rheo);
    benchmark::DoNotOptimize(s.v.data());
  }
  st.SetLabel(std::string(to_string(cfg.staggering)));
}

}  // namespace

BENCHMARK(strain_reference)->Apply(args);
BENCHMARK(strain_parallel)->Apply(args);
BENCHMARK(divergence_reference)->Apply(args);
BENCHMARK(divergence_parallel)->Apply(args);
BENCHMARK(stabilization_reference)->Arg(64)->Arg(128);
BENCHMARK(stabilization_parallel)->Arg(64)->Arg(128);
BENCHMARK(mevp_step)->Apply(args)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

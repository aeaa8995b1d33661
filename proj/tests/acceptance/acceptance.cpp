// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.
//
// The long benchmark runs live under --work and are reused when their
// config echo matches and they finished; wall times come from run.json, so a
// reused run still reports the time it took. Detection always reruns.
// --fresh reruns everything.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "seaice/experiment.hpp"
#include "seaice/momentum.hpp"

using namespace seaice;

namespace {

// Pinned tolerances.
constexpr double kRheoTol = 1e-12;
constexpr double kPlasticTol = 1e-6;
constexpr double kOperatorTol = 1e-12;
constexpr double kSolverL2 = 1e-3;
constexpr double kPatternCorr = 0.8;
constexpr double kCountSpread = 0.25;
constexpr double kVolumeDrift = 1e-10;
constexpr double kLengthTol = 0.10;
constexpr double kRotationTol = 0.05;
constexpr double kSingleRunS = 300.0;
constexpr double kMatrixS = 1800.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void log(const std::string& s) { std::cerr << "[acceptance] " << s << std::endl; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Verdict {
  bool pass = false;
  std::string text;
};
std::map<int, Verdict> verdicts;

void verdict(int id, bool pass, const std::string& text) {
  verdicts[id] = {pass, text};
  log(fmt("criterion %d: %s", id, pass ? "PASS" : "FAIL"));
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// ---------------------------------------------------------------- 1: rheology

bool rheology_suite(std::string& why) {
  RheoParams p;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1e-6);
  double worst = 0.0;
  auto track = [&](double r) { worst = std::max(worst, r); };

  // Delta through strain invariants: divergence^2 + shear^2 / e^2.
  for (int k = 0; k < 500; ++k) {
    const StrainRate x{n(rng), n(rng), n(rng)};
    const double d = x.e11 + x.e22;
    const double s2 = (x.e11 - x.e22) * (x.e11 - x.e22) + 4 * x.e12 * x.e12;
    track(rel(delta(x, p), std::sqrt(d * d + s2 / (p.e * p.e))));
  }
  track(rel(delta({0, 0, 3.7e-7}, p), 3.7e-7));
  track(rel(delta({-2.5e-6, -2.5e-6, 0}, p), 5e-6));
  if (delta({}, p) != 0.0) return why = "Delta(0) != 0", false;

  track(rel(ice_strength(0.3, 1.0, p), 8250.0));
  track(rel(ice_strength(1.0, 0.95, p), 27500.0 * std::exp(-1.0)));
  if (std::abs(ice_strength(1.0, 0.95, p) - 10116.8) > 0.2) return why = "P0(1, 0.95)", false;

  const double P0 = 8250.0;
  track(rel(viscosities(0.0, P0, p).zeta, P0 / (2 * p.Delta_min)));
  track(rel(viscosities(p.Delta_min, P0, p).eta, P0 / (2 * std::sqrt(2.0) * p.Delta_min) / 4.0));
  track(rel(replacement_pressure(p.Delta_min, P0, p), P0 / 4));
  if (replacement_pressure(0.0, P0, p) != 0.0) return why = "P(0) != 0", false;

  // sigma componentwise, and rate independence deep in the plastic regime
  double plastic = 0.0;
  for (int k = 0; k < 200; ++k) {
    StrainRate x{n(rng), n(rng), n(rng)};
    const double D = delta(x, p);
    const double zeta = P0 / (2 * std::sqrt(D * D + p.Delta_min * p.Delta_min));
    const double eta = zeta / (p.e * p.e);
    const double P = P0 * D / (2 * (D + p.Delta_min));
    const double tr = x.e11 + x.e22;
    const Stress s = vp_stress(x, evaluate_rheology(x, P0, p));
    track(std::abs(s.s11 - (2 * eta * x.e11 + (zeta - eta) * tr - P / 2)) / (P0 + std::abs(s.s11)));
    track(std::abs(s.s12 - 2 * eta * x.e12) / (P0 + std::abs(s.s12)));
    const double c = 1e6 * p.Delta_min / D;
    x = {x.e11 * c, x.e22 * c, x.e12 * c};
    const Stress a = vp_stress(x, evaluate_rheology(x, P0, p));
    const StrainRate y{2 * x.e11, 2 * x.e22, 2 * x.e12};
    const Stress b = vp_stress(y, evaluate_rheology(y, P0, p));
    const double na = std::sqrt(a.s11 * a.s11 + a.s22 * a.s22 + 2 * a.s12 * a.s12);
    plastic = std::max(plastic, std::sqrt(std::pow(a.s11 - b.s11, 2) + std::pow(a.s22 - b.s22, 2) +
                                          2 * std::pow(a.s12 - b.s12, 2)) / na);
  }
  if (plastic > kPlasticTol) return why = fmt("plastic rate dependence %.2e", plastic), false;

  // EVP: sigma_VP is a fixed point. mEVP: error shrinks by exactly (1 - 1/alpha).
  const StrainRate x{1.2e-7, -4e-8, 7e-8};
  const RheologyEval r = evaluate_rheology(x, P0, p);
  const Stress target = vp_stress(x, r);
  const Stress fp = evp_stress_update(target, x, r, 1500.0, 0.24, p);
  track(std::abs(fp.s11 - target.s11) / P0 + std::abs(fp.s22 - target.s22) / P0 + std::abs(fp.s12 - target.s12) / P0);
  Stress s{};
  const double alpha = 500.0;
  for (int k = 1; k <= 10; ++k) {
    s = mevp_stress_update(s, x, r, alpha);
    track(rel(target.s11 - s.s11, target.s11 * std::pow(1.0 - 1.0 / alpha, k)));
    track(rel(target.s12 - s.s12, target.s12 * std::pow(1.0 - 1.0 / alpha, k)));
  }
  if (worst > kRheoTol) return why = fmt("worst relative error %.2e", worst), false;
  why = fmt("worst rel. error %.1e, plastic rate dependence %.1e", worst, plastic);
  return true;
}

// ---------------------------------------------------------------- 2: operators

bool interior_element(const Discretization& op, int e) {
  if (op.elem_num_nodes[e] != 4) return false;
  for (int k = 0; k < 4; ++k)
    if (op.on_boundary(op.elem_nodes[e][k])) return false;
  return true;
}

bool operator_suite(std::string& why) {
  double rigid = 0.0, affine = 0.0, adjoint = 0.0;
  bool cd2_same = true;
  for (Staggering s : {Staggering::B, Staggering::CD1, Staggering::CD2}) {
    const Discretization op = Discretization::build(Grid::build(512e3, 64, 64), s);
    std::vector<StrainRate> eps(op.num_qp());
    auto field = [&](auto f) {
      std::vector<Vec2> v(op.num_points());
      for (int p = 0; p < op.num_points(); ++p) v[p] = f(op.points[p]);
      return v;
    };
    const double w = 1e-6, c = 256e3;
    compute_strain(op, field([&](Point p) { return Vec2{0.2 - w * (p.y - c), -0.1 + w * (p.x - c)}; }), eps);
    for (int e = 0; e < op.num_elements(); ++e)
      if (interior_element(op, e))
        rigid = std::max({rigid, std::abs(eps[e].e11) / w, std::abs(eps[e].e22) / w, std::abs(eps[e].e12) / w});
    const double a = 2e-7, b = -3e-7, cc = 5e-8, d = -1e-7;
    compute_strain(op, field([&](Point p) { return Vec2{a * p.x + b * p.y, cc * p.x + d * p.y}; }), eps);
    for (int e = 0; e < op.num_elements(); ++e)
      if (interior_element(op, e))
        affine = std::max({affine, rel(eps[e].e11, a), rel(eps[e].e22, d), rel(eps[e].e12, 0.5 * (b + cc))});

    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<Stress> sig(op.num_qp());
    for (auto& x : sig) x = {1e3 * n(rng), 1e3 * n(rng), 1e3 * n(rng)};
    std::vector<Vec2> v(op.num_points());
    for (auto& x : v) x = {n(rng), n(rng)};
    std::vector<Vec2> f(op.num_points());
    stress_divergence(op, sig, f);
    compute_strain(op, v, eps);
    double lhs = 0.0, rhs = 0.0, scale = 0.0;
    for (int p = 0; p < op.num_points(); ++p) lhs += f[p].x * v[p].x + f[p].y * v[p].y;
    for (int q = 0; q < op.num_qp(); ++q) {
      const double t = sig[q].s11 * eps[q].e11 + sig[q].s22 * eps[q].e22 + 2 * sig[q].s12 * eps[q].e12;
      rhs -= op.qp_weight[q] * t;
      scale += op.qp_weight[q] * std::abs(t);
    }
    adjoint = std::max(adjoint, std::abs(lhs - rhs) / scale);

    if (s == Staggering::CD2) {
      for (int e = 0; e < op.num_elements(); ++e) {
        const DiamondCell& dc = op.diamonds->cells[e];
        if (dc.shape != DiamondShape::Full) continue;
        std::array<Point, 4> corners{};
        for (int k = 0; k < 4; ++k) corners[k] = op.points[dc.nodes[k]];
        std::array<double, 4> gx{}, gy{};
        const double det = q1_gradients(corners, 0.0, 0.0, gx, gy);
        cd2_same = cd2_same && gx == op.qp_gx[e] && gy == op.qp_gy[e] && 4.0 * det == op.qp_weight[e];
      }
    }
  }
  why = fmt("rigid %.1e, affine %.1e, adjoint %.1e, CD2 diamond = B element %s", rigid, affine, adjoint,
            cd2_same ? "bitwise" : "DIFFERS");
  return rigid <= kOperatorTol && affine <= kOperatorTol && adjoint <= kOperatorTol && cd2_same;
}

// ---------------------------------------------------------------- 3a: frozen step

double rel_l2(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  double d = 0.0, n = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += std::pow(a[i].x - b[i].x, 2) + std::pow(a[i].y - b[i].y, 2);
    n += b[i].x * b[i].x + b[i].y * b[i].y;
  }
  return std::sqrt(d / n);
}

struct FrozenStep {
  double mevp = 0.0;
  double evp = 0.0;
  int picard_iterations = 0;
  bool picard_converged = false;
};

FrozenStep frozen_step() {
  BenchmarkConfig cfg;
  cfg.h = 8e3;
  cfg.T_end = 6 * 3600.0;
  cfg.output_every = 0;
  const Discretization op = Discretization::build(cfg.make_grid(), cfg.staggering);
  const State spun = run_benchmark(cfg, op).final_state;
  const Forcing f = benchmark_forcing(op, cfg, cfg.T_end);

  SolverConfig pc = SolverConfig::defaults(Scheme::Picard);
  pc.picard_tol = 1e-9;
  pc.picard_anderson = 5;
  pc.picard_max = 3000;
  State pic = spun;
  const SolveReport pr = picard_vp_solve(op, pic, f, cfg.dt, pc, cfg.rheo);

  SolverConfig mc = SolverConfig::defaults(Scheme::MEVP);
  mc.n_sub = 10000;
  State me = spun;
  mevp_solve(op, me, f, cfg.dt, mc, cfg.rheo);

  SolverConfig ec = SolverConfig::defaults(Scheme::EVP);
  ec.n_sub = 10000;
  State ev = spun;
  evp_solve(op, ev, f, cfg.dt, ec, cfg.rheo);

  return {rel_l2(me.v, pic.v), rel_l2(ev.v, pic.v), pr.iterations, pr.converged};
}

// ---------------------------------------------------------------- runs

struct RunInfo {
  RunConfig cfg;
  fs::path dir;
  bool ok = false;
  SummaryRow row;
  double drift = 0.0;
  bool bounds = false;
  std::string error;
};

bool reusable(const RunConfig& cfg, const fs::path& dir) {
  std::ifstream in(dir / "config.toml");
  if (!in) return false;
  std::string first;
  std::getline(in, first);  // "# git ..."
  std::stringstream rest;
  rest << in.rdbuf();
  if (rest.str() != echo_config(cfg)) return false;
  std::ifstream rj(dir / "run.json");
  if (!rj || !fs::exists(dir / "stats.csv")) return false;
  const auto j = nlohmann::json::parse(rj, nullptr, false);
  return !j.is_discarded() && j.value("status", "") == "ok";
}

RunInfo ensure_run(const RunConfig& cfg, const fs::path& root, bool fresh) {
  RunInfo r;
  r.cfg = cfg;
  r.dir = root / cfg.run_name();
  try {
    if (fresh || !reusable(cfg, r.dir)) {
      log("running " + cfg.run_name());
      run_to_directory(cfg, r.dir);
    } else {
      log("reusing " + cfg.run_name());
    }
    detect_run(r.dir);  // cheap; keeps the statistics current with the detector
    r.row = summarize_run(r.dir);
    std::ifstream rj(r.dir / "run.json");
    const auto j = nlohmann::json::parse(rj);
    r.drift = j.value("max_volume_drift", 1.0);
    r.bounds = j.value("bounds_ok", false);
    r.ok = r.row.status == "ok";
    log(fmt("  %s: %.0f s, lkf %d, %.0f km", cfg.run_name().c_str(), r.row.wall_time_s, r.row.lkf_count,
            r.row.lkf_total_length_km));
  } catch (const std::exception& e) {
    r.error = e.what();
    log("  FAILED " + cfg.run_name() + ": " + r.error);
  }
  return r;
}

RunConfig run_cfg(Staggering s, Scheme scheme, double h_km, const std::string& root) {
  RunConfig c;
  c.bench.staggering = s;
  c.bench.h = h_km * 1e3;
  c.bench.solver = SolverConfig::defaults(scheme);
  // Two-day Picard runs take a fixed number of outer iterations per step;
  // iterating each step to picard_tol would take hours at 8 km.
  if (scheme == Scheme::Picard) c.bench.solver.picard_max = 3;
  c.output_root = root;
  return c;
}

std::vector<double> log_shear(const fs::path& dir) {
  std::vector<double> s = read_snapshot_field(list_snapshots(dir).back(), "shear");
  for (double& x : s) x = std::log10(std::max(x, 1e-12));
  return s;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / n;
    mb += b[i] / n;
  }
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// ---------------------------------------------------------------- 9: detector

Image corpus_blank() {
  Image img;
  img.width = img.height = 128;
  img.pixel_m = 2000.0;
  img.data.assign(128 * 128, 1e-7);
  return img;
}

void paint(Image& img, int x0, int x1, int y0, int y1, double v) {
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) img.at(x, y) = v;
}

bool detector_corpus(std::string& why) {
  const DetectorParams p;
  std::ostringstream msg;
  bool pass = true;
  auto fail = [&](const std::string& s) {
    pass = false;
    msg << s << "; ";
  };

  if (!detect(corpus_blank(), p).empty()) fail("constant image has segments");

  Image ridge = corpus_blank();
  paint(ridge, 39, 89, 63, 66, 1e-6);  // 100 km by 3 px
  const auto r = detect(ridge, p);
  if (r.size() != 1) fail(fmt("ridge: %zu segments", r.size()));
  else if (std::abs(r[0].length_km - 100.0) > kLengthTol * 100.0) fail(fmt("ridge length %.1f km", r[0].length_km));
  msg << fmt("ridge %zu seg", r.size());

  Image cross = ridge;
  paint(cross, 63, 66, 39, 89, 1e-6);
  const LKFStats xs = lkf_stats(detect(cross, p));
  if (xs.count < 2) fail(fmt("cross: %d segments", xs.count));
  if (std::abs(xs.total_length_km - 200.0) > kLengthTol * 200.0) fail(fmt("cross length %.1f km", xs.total_length_km));
  msg << fmt(", cross %d seg %.0f km", xs.count, xs.total_length_km);

  Image thin = corpus_blank();
  paint(thin, 39, 89, 64, 65, 1e-6);
  if (!detect(thin, p).empty()) fail("1-px ridge detected");

  Image two = corpus_blank();
  paint(two, 39, 89, 63, 66, 1e-6);
  paint(two, 28, 32, 20, 50, 1e-6);
  const LKFStats clean = lkf_stats(detect(two, p));
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Image noisy = two;
    for (double& v : noisy.data) v += 0.01 * 1e-6 * u(rng);
    const LKFStats s = lkf_stats(detect(noisy, p));
    if (s.count != clean.count || std::abs(s.total_length_km - clean.total_length_km) >= kLengthTol * clean.total_length_km) {
      fail(fmt("noise trial %d: %d seg %.0f km vs %d seg %.0f km", trial, s.count, s.total_length_km, clean.count,
               clean.total_length_km));
      break;
    }
  }

  Image rot = two;
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 128; ++x) rot.at(x, y) = two.at(y, x);
  const LKFStats rs = lkf_stats(detect(rot, p));
  if (rs.count != clean.count || std::abs(rs.total_length_km - clean.total_length_km) > kRotationTol * clean.total_length_km)
    fail("rotation changes the result");

  for (const Image& base : {ridge, cross, two}) {
    const auto ref = detect(base, p);
    for (double c : {1e-4, 0.37, 3.0, 1e5}) {
      Image scaled = base;
      for (double& v : scaled.data) v *= c;
      const auto got = detect(scaled, p);
      bool same = got.size() == ref.size();
      for (std::size_t k = 0; same && k < got.size(); ++k)
        same = got[k].pixels == ref[k].pixels && got[k].length_km == ref[k].length_km;
      if (!same) {
        fail(fmt("scale %g changes the segments", c));
        break;
      }
    }
  }
  msg << ", noise/rotation/scale/width checks";
  why = msg.str();
  return pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string work = "acceptance_runs";
  bool fresh = false;
  std::vector<int> only;
  app.add_option("--work", work, "directory for the benchmark runs");
  app.add_flag("--fresh", fresh, "rerun every benchmark instead of reusing finished runs");
  app.add_option("--only", only, "evaluate only these criteria");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> want(only.begin(), only.end());
  auto wanted = [&](int id) { return want.empty() || want.count(id) > 0; };
  const fs::path root = fs::absolute(work);
  fs::create_directories(root);

  if (wanted(1)) {
    const auto t0 = Clock::now();
    std::string why;
    const bool ok = rheology_suite(why);
    const double t = seconds_since(t0);
    verdict(1, ok && t < 1.0, fmt("rheology kernels: %s (%.3f s, budget 1 s)", why.c_str(), t));
  }
  if (wanted(2)) {
    const auto t0 = Clock::now();
    std::string why;
    const bool ok = operator_suite(why);
    const double t = seconds_since(t0);
    verdict(2, ok && t < 10.0, fmt("operators on 64x64, tol %.0e: %s (%.2f s, budget 10 s)", kOperatorTol, why.c_str(), t));
  }
  if (wanted(7)) {
    const Grid g = Grid::build(512e3, 64, 64);
    const long cd1 = dof_counts(g, Staggering::CD1).velocity_dof;
    const long cd2 = dof_counts(g, Staggering::CD2).velocity_dof;
    const long b = dof_counts(g, Staggering::B).velocity_dof;
    verdict(7, g.num_cells() == 4096 && cd1 == 16384 && cd2 == 16384 && b == 8192,
            fmt("dof for N=%d: CD1 %ld, CD2 %ld (want 16384), B %ld (want 8192)", g.num_cells(), cd1, cd2, b));
  }
  if (wanted(9)) {
    std::string why;
    const bool ok = detector_corpus(why);
    verdict(9, ok, "detector corpus: " + why);
  }

  // Benchmark runs shared by criteria 3-6, 8 and 10.
  const bool need_runs = wanted(3) || wanted(4) || wanted(5) || wanted(6) || wanted(8) || wanted(10);
  std::map<std::string, RunInfo> runs;
  auto key = [](Staggering s, Scheme sc, double h) {
    return std::string(to_string(s)) + "/" + std::string(to_string(sc)) + "/" + fmt("%g", h);
  };
  const Staggering kStag[] = {Staggering::B, Staggering::CD1, Staggering::CD2};
  const Scheme kScheme[] = {Scheme::MEVP, Scheme::EVP, Scheme::Picard};
  RunInfo twin;
  if (need_runs) {
    for (Staggering s : kStag)
      for (Scheme sc : kScheme) runs[key(s, sc, 8)] = ensure_run(run_cfg(s, sc, 8, root.string()), root, fresh);
    RunConfig t = run_cfg(Staggering::B, Scheme::MEVP, 8, root.string());
    t.bench.nx = 128;
    t.bench.ny = 64;
    twin = ensure_run(t, root, fresh);
    if (wanted(4) || wanted(5) || wanted(8))
      for (Staggering s : kStag) runs[key(s, Scheme::MEVP, 4)] = ensure_run(run_cfg(s, Scheme::MEVP, 4, root.string()), root, fresh);
  }
  auto get = [&](Staggering s, Scheme sc, double h) -> const RunInfo& { return runs.at(key(s, sc, h)); };

  if (wanted(3)) {
    const auto t0 = Clock::now();
    log("frozen single step at 8 km");
    const FrozenStep fs_ = frozen_step();
    const double t_step = seconds_since(t0);
    const RunInfo& m = get(Staggering::B, Scheme::MEVP, 8);
    const RunInfo& e = get(Staggering::B, Scheme::EVP, 8);
    const RunInfo& p = get(Staggering::B, Scheme::Picard, 8);
    bool ok = fs_.mevp <= kSolverL2 && fs_.evp <= kSolverL2;
    std::string text = fmt("frozen step rel L2 vs Picard (%d it%s): mEVP(1e4) %.1e, EVP(1e4) %.1e (tol %.0e)",
                           fs_.picard_iterations, fs_.picard_converged ? "" : ", not converged", fs_.mevp, fs_.evp,
                           kSolverL2);
    if (m.ok && e.ok && p.ok) {
      const auto lm = log_shear(m.dir), le = log_shear(e.dir), lp = log_shear(p.dir);
      const double c_me = correlation(lm, le), c_mp = correlation(lm, lp), c_ep = correlation(le, lp);
      const int a = m.row.lkf_count, b = e.row.lkf_count, c = p.row.lkf_count;
      const double spread = std::max({std::abs(a - b) / double(std::max(a, b)), std::abs(a - c) / double(std::max(a, c)),
                                      std::abs(b - c) / double(std::max(b, c))});
      ok = ok && std::min({c_me, c_mp, c_ep}) >= kPatternCorr && spread <= kCountSpread;
      text += fmt("; 2-day B corr mEVP-EVP %.3f, mEVP-Picard %.3f, EVP-Picard %.3f (min %.1f); lkf %d/%d/%d, "
                  "spread %.0f%% (max %.0f%%); %.0f s",
                  c_me, c_mp, c_ep, kPatternCorr, a, b, c, 100 * spread, 100 * kCountSpread,
                  t_step + m.row.wall_time_s + e.row.wall_time_s + p.row.wall_time_s);
    } else {
      ok = false;
      text += "; a 2-day B run failed";
    }
    verdict(3, ok, "solver equivalence: " + text);
  }
  if (wanted(4)) {
    bool ok = true;
    std::string text;
    for (double h : {8.0, 4.0}) {
      const RunInfo& b = get(Staggering::B, Scheme::MEVP, h);
      const RunInfo& c1 = get(Staggering::CD1, Scheme::MEVP, h);
      const RunInfo& c2 = get(Staggering::CD2, Scheme::MEVP, h);
      if (!(b.ok && c1.ok && c2.ok)) {
        ok = false;
        text += fmt("%g km: run failed; ", h);
        continue;
      }
      const bool order = c1.row.lkf_count > c2.row.lkf_count && c2.row.lkf_count > b.row.lkf_count &&
                         c1.row.lkf_total_length_km > c2.row.lkf_total_length_km &&
                         c2.row.lkf_total_length_km > b.row.lkf_total_length_km;
      ok = ok && order;
      text += fmt("%g km CD1/CD2/B lkf %d/%d/%d, length %.0f/%.0f/%.0f km; ", h, c1.row.lkf_count, c2.row.lkf_count,
                  b.row.lkf_count, c1.row.lkf_total_length_km, c2.row.lkf_total_length_km, b.row.lkf_total_length_km);
    }
    verdict(4, ok, "staggering ordering CD1 > CD2 > B (mEVP): " + text);
  }
  if (wanted(5)) {
    bool ok = true;
    std::string text;
    for (Staggering s : kStag) {
      const RunInfo& a = get(s, Scheme::MEVP, 8);
      const RunInfo& b = get(s, Scheme::MEVP, 4);
      const bool up = a.ok && b.ok && b.row.lkf_count > a.row.lkf_count &&
                      b.row.lkf_total_length_km > a.row.lkf_total_length_km;
      ok = ok && up;
      text += fmt("%s lkf %d->%d, %.0f->%.0f km; ", std::string(to_string(s)).c_str(), a.row.lkf_count,
                  b.row.lkf_count, a.row.lkf_total_length_km, b.row.lkf_total_length_km);
    }
    verdict(5, ok, "resolution 8 -> 4 km (mEVP): " + text);
  }
  if (wanted(6)) {
    const RunInfo& c2 = get(Staggering::CD2, Scheme::MEVP, 8);
    const bool ok = c2.ok && twin.ok && c2.row.velocity_dof == twin.row.velocity_dof;
    verdict(6, ok,
            fmt("same dof: CD2 64x64 %ld dof lkf %d %.0f km; B 128x64 %ld dof lkf %d %.0f km (no ordering asserted)",
                c2.row.velocity_dof, c2.row.lkf_count, c2.row.lkf_total_length_km, twin.row.velocity_dof,
                twin.row.lkf_count, twin.row.lkf_total_length_km));
  }
  if (wanted(8)) {
    bool ok = true;
    double worst = 0.0;
    int n = 0;
    std::vector<const RunInfo*> all{&twin};
    for (const auto& [k, r] : runs) all.push_back(&r);
    for (const RunInfo* r : all) {
      ok = ok && r->ok && r->bounds && r->drift <= kVolumeDrift;
      worst = std::max(worst, r->drift);
      ++n;
    }
    verdict(8, ok, fmt("conservation and bounds over %d two-day runs: max volume drift %.1e (tol %.0e), bounds %s", n,
                       worst, kVolumeDrift, ok ? "held" : "see runs"));
  }
  if (wanted(10)) {
    const RunInfo& b = get(Staggering::B, Scheme::MEVP, 8);
    double matrix = 0.0;
    bool all_ok = true;
    for (Staggering s : kStag)
      for (Scheme sc : kScheme) {
        matrix += get(s, sc, 8).row.wall_time_s;
        all_ok = all_ok && get(s, sc, 8).ok;
      }
    const bool ok = b.ok && all_ok && b.row.wall_time_s < kSingleRunS && matrix < kMatrixS;
    verdict(10, ok, fmt("performance: 8 km B mEVP %.0f s (budget %.0f s), 9-run 8 km matrix %.0f s serial (budget %.0f s)",
                        b.row.wall_time_s, kSingleRunS, matrix, kMatrixS));
  }

  int failed = 0;
  for (const auto& [id, v] : verdicts) {
    std::printf("%s %2d  %s\n", v.pass ? "PASS" : "FAIL", id, v.text.c_str());
    failed += v.pass ? 0 : 1;
  }
  std::printf("%zu criteria, %d failed\n", verdicts.size(), failed);
  return failed == 0 ? 0 : 1;
}

#include "seaice/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace seaice {

using nlohmann::json;

namespace {

void write_run_json(const fs::path& dir, const RunConfig& cfg, const DofReport& d, const std::string& status,
                    const RunResult* r) {
  json j;
  j["status"] = status;
  j["staggering"] = std::string(to_string(cfg.bench.staggering));
  j["solver"] = std::string(to_string(cfg.bench.solver.scheme));
  j["h_km"] = cfg.bench.h / 1e3;
  const Grid g = cfg.bench.make_grid();
  j["nx"] = g.nx();
  j["ny"] = g.ny();
  j["velocity_dof"] = d.velocity_dof;
  j["tracer_dof"] = d.tracer_dof;
  j["git_describe"] = git_describe();
  if (r) {
    j["wall_time_s"] = r->wall_time_s;
    j["max_volume_drift"] = r->max_volume_drift;
    j["bounds_ok"] = r->bounds_ok;
    j["max_speed"] = r->max_speed;
    int nonconv = 0;
    for (const auto& t : r->telemetry) nonconv += t.converged ? 0 : 1;
    j["unconverged_steps"] = nonconv;
  }
  std::ofstream(dir / "run.json") << j.dump(2) << "\n";
}

RunConfig config_of(const fs::path& run_dir) {
  const fs::path f = run_dir / "config.toml";
  if (!fs::exists(f)) throw std::runtime_error(run_dir.string() + ": no config.toml");
  return load_run_config(f);
}

std::string snap_name(int step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%06d", step);
  return buf;
}

}  // namespace

RunOutcome run_to_directory(const RunConfig& cfg, const fs::path& dir) {
  cfg.validate();
  fs::create_directories(dir);
  for (const fs::path& old : list_snapshots(dir)) fs::remove_all(old);
  for (const char* f : {"segments.csv", "stats.csv", "run.json", "telemetry.csv"}) fs::remove(dir / f);

  const std::string echo = echo_config(cfg);
  std::ofstream(dir / "config.toml") << "# git " << git_describe() << "\n" << echo;
  const Discretization op = Discretization::build(cfg.bench.make_grid(), cfg.bench.staggering,
                                                  cfg.bench.quadrature_points);
  RunOutcome out;
  out.dir = dir;
  out.dofs = dof_counts(op.grid, cfg.bench.staggering);
  write_run_json(dir, cfg, out.dofs, "running", nullptr);
  try {
    out.result = run_benchmark(cfg.bench, op, [&](const Snapshot& s) {
      write_snapshot(dir / snap_name(s.step), op, s, echo);
    });
  } catch (const BenchmarkFailure& e) {
    write_run_json(dir, cfg, out.dofs, std::string("failed: ") + e.what(), nullptr);
    throw;
  }
  write_telemetry_csv(dir / "telemetry.csv", out.result.telemetry);
  write_run_json(dir, cfg, out.dofs, "ok", &out.result);
  return out;
}

DetectionStats detect_run(const fs::path& run_dir, const std::optional<DetectorParams>& params, double dq) {
  const RunConfig cfg = config_of(run_dir);
  const auto snaps = list_snapshots(run_dir);
  if (snaps.empty()) throw std::runtime_error(run_dir.string() + ": no snapshot to detect on");
  const std::vector<double> shear = read_snapshot_field(snaps.back(), "shear");
  const Discretization op = Discretization::build(cfg.bench.make_grid(), cfg.bench.staggering,
                                                  cfg.bench.quadrature_points);
  if (static_cast<int>(shear.size()) != op.num_elements())
    throw std::runtime_error(snaps.back().string() + ": shear size does not match the configured grid");
  const Image img = regrid(op, shear, cfg.pixel_km * 1e3, cfg.regrid);

  DetectorParams p = params.value_or(cfg.detector);
  p.validate();
  const std::vector<LKFSegment> segs = detect(img, p);
  DetectionStats s;
  s.threshold_quantile = p.threshold_quantile;
  s.stats = lkf_stats(segs);
  s.q_low = std::max(p.threshold_quantile - dq, 0.01);
  s.q_high = std::min(p.threshold_quantile + dq, 0.99);
  DetectorParams lo = p;
  lo.threshold_quantile = s.q_low;
  DetectorParams hi = p;
  hi.threshold_quantile = s.q_high;
  s.at_q_low = lkf_stats(detect(img, lo));
  s.at_q_high = lkf_stats(detect(img, hi));
  s.count_sensitivity = std::max(std::abs(s.at_q_low.count - s.stats.count), std::abs(s.at_q_high.count - s.stats.count));
  write_segments_csv(run_dir / "segments.csv", segs);
  write_stats_csv(run_dir / "stats.csv", s);
  return s;
}

SummaryRow summarize_run(const fs::path& run_dir) {
  const RunConfig cfg = config_of(run_dir);
  const Grid g = cfg.bench.make_grid();
  const DofReport d = dof_counts(g, cfg.bench.staggering);
  SummaryRow r;
  r.staggering = std::string(to_string(cfg.bench.staggering));
  r.h_km = cfg.bench.h / 1e3;
  r.nx = g.nx();
  r.ny = g.ny();
  r.solver = std::string(to_string(cfg.bench.solver.scheme));
  r.velocity_dof = d.velocity_dof;
  r.tracer_dof = d.tracer_dof;
  r.run = run_dir.filename().string();
  std::ifstream rj(run_dir / "run.json");
  if (!rj) {
    r.status = "missing run.json";
    return r;
  }
  const json j = json::parse(rj);
  r.status = j.value("status", std::string("unknown"));
  std::replace(r.status.begin(), r.status.end(), ',', ';');
  std::replace(r.status.begin(), r.status.end(), '\n', ' ');
  r.wall_time_s = j.value("wall_time_s", 0.0);
  if (r.status == "ok") {
    if (!fs::exists(run_dir / "stats.csv")) {
      r.status = "not detected";
    } else {
      const DetectionStats s = read_stats_csv(run_dir / "stats.csv");
      r.lkf_count = s.stats.count;
      r.lkf_total_length_km = s.stats.total_length_km;
      r.count_sensitivity = s.count_sensitivity;
    }
  }
  return r;
}

std::vector<SummaryRow> summarize_root(const fs::path& root) {
  std::vector<SummaryRow> rows;
  if (!fs::is_directory(root)) throw std::runtime_error(root.string() + " is not a directory");
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory() && fs::exists(entry.path() / "config.toml")) rows.push_back(summarize_run(entry.path()));
  sort_summary(rows);
  return rows;
}

MatrixOutcome run_matrix(const ExperimentMatrix& m, const fs::path& root,
                         const std::function<void(const std::string&)>& log) {
  const int n = static_cast<int>(m.runs.size());
  std::vector<SummaryRow> rows(n);
  std::atomic<int> next{0};
  std::atomic<int> failures{0};
  std::mutex log_mutex;
  auto say = [&](const std::string& s) {
    if (!log) return;
    std::lock_guard<std::mutex> lock(log_mutex);
    log(s);
  };
  const int workers = std::max(1, std::min(m.workers, n));
#ifdef _OPENMP
  const int threads_per_worker = std::max(1, omp_get_max_threads() / workers);
#endif
  auto work = [&] {
#ifdef _OPENMP
    omp_set_num_threads(threads_per_worker);
#endif
    for (int i = next++; i < n; i = next++) {
      const RunConfig& cfg = m.runs[i];
      const fs::path dir = root / cfg.run_name();
      say("start " + cfg.run_name());
      try {
        const RunOutcome o = run_to_directory(cfg, dir);
        detect_run(dir);
        rows[i] = summarize_run(dir);
        std::ostringstream msg;
        msg << "done  " << cfg.run_name() << "  " << o.result.wall_time_s << " s, lkf " << rows[i].lkf_count;
        say(msg.str());
      } catch (const std::exception& e) {
        ++failures;
        rows[i] = fs::exists(dir / "config.toml") ? summarize_run(dir) : SummaryRow{};
        rows[i].run = cfg.run_name();
        std::string what = e.what();
        std::replace(what.begin(), what.end(), ',', ';');
        std::replace(what.begin(), what.end(), '\n', ' ');
        rows[i].status = "failed: " + what;
        say("FAIL  " + cfg.run_name() + ": " + e.what());
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  MatrixOutcome out;
  out.rows = rows;
  sort_summary(out.rows);
  out.failures = failures;
  const std::vector<SummaryRow> all = merge_summary_csv(root / "summary.csv", out.rows);
  write_plot_data(root, all);
  return out;
}

}  // namespace seaice

// Command-line front end: run, matrix, detect, summarize, grid-info.
//
// Exit codes: 0 success, 1 config error, 2 runtime failure, 3 partial matrix failure.
// SEAICE_OUTPUT_ROOT overrides the output_root of a config; --output-root overrides both.

#include <CLI11.hpp>

#include <iostream>

#include "seaice/experiment.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 1, kRuntime = 2, kPartial = 3 };

void print_rows(const std::vector<seaice::SummaryRow>& rows) {
  std::cout << "staggering  h_km  nx x ny    solver  vel_dof  lkf  length_km  status\n";
  for (const auto& r : rows) {
    std::printf("%-10s %5g  %4d x %-4d %-7s %8ld %4d %10.1f  %s\n", r.staggering.c_str(), r.h_km, r.nx, r.ny,
                r.solver.c_str(), r.velocity_dof, r.lkf_count, r.lkf_total_length_km, r.status.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sea-ice dynamics on B, CD1 and CD2 staggerings: benchmark runs and LKF statistics"};
  app.require_subcommand(1);
  std::string root_override;
  app.add_option("--output-root", root_override, "output directory (beats $SEAICE_OUTPUT_ROOT and the config)");

  std::string run_cfg;
  bool run_detect = false;
  auto* run = app.add_subcommand("run", "single benchmark run from a config file");
  run->add_option("config", run_cfg, "config file")->required()->check(CLI::ExistingFile);
  run->add_flag("--detect", run_detect, "run the LKF detector on the final shear");

  std::string matrix_cfg;
  int workers = 0;
  auto* matrix = app.add_subcommand("matrix", "run a staggering x resolution x solver matrix");
  matrix->add_option("config", matrix_cfg, "matrix file")->required()->check(CLI::ExistingFile);
  matrix->add_option("-j,--workers", workers, "concurrent runs (overrides the file)")->check(CLI::PositiveNumber);

  std::string detect_dir;
  std::optional<double> quantile;
  auto* detect = app.add_subcommand("detect", "detect LKFs in a run directory");
  detect->add_option("run_dir", detect_dir, "run directory")->required()->check(CLI::ExistingDirectory);
  detect->add_option("-q,--threshold-quantile", quantile, "override the configured threshold quantile");

  std::string summarize_dir;
  auto* summarize = app.add_subcommand("summarize", "summary.csv and plot data for every run below a directory");
  summarize->add_option("root", summarize_dir, "directory holding run directories");

  std::string g_stag = "B";
  double g_h_km = 8.0;
  double g_L_km = 512.0;
  int g_nx = 0;
  int g_ny = 0;
  auto* grid_info = app.add_subcommand("grid-info", "grid metadata and dof counts as JSON");
  grid_info->add_option("-s,--staggering", g_stag, "B, CD1 or CD2");
  grid_info->add_option("--h-km", g_h_km, "cell size");
  grid_info->add_option("--L-km", g_L_km, "domain side");
  grid_info->add_option("--nx", g_nx, "cells along x (overrides h)");
  grid_info->add_option("--ny", g_ny, "cells along y (overrides h)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  try {
    if (*run) {
      const seaice::RunConfig cfg = seaice::load_run_config(run_cfg);
      const auto dir = seaice::resolve_output_root(cfg.output_root, root_override) / cfg.run_name();
      const auto out = seaice::run_to_directory(cfg, dir);
      std::cout << dir.string() << "\n";
      std::printf("wall %.1f s, volume drift %.3g, bounds %s\n", out.result.wall_time_s,
                  out.result.max_volume_drift, out.result.bounds_ok ? "ok" : "VIOLATED");
      if (run_detect) {
        const auto s = seaice::detect_run(dir);
        std::printf("lkf %d, total length %.1f km\n", s.stats.count, s.stats.total_length_km);
      }
      return kOk;
    }
    if (*matrix) {
      seaice::ExperimentMatrix m = seaice::load_matrix(matrix_cfg);
      if (workers > 0) m.workers = workers;
      const auto root = seaice::resolve_output_root(m.output_root, root_override);
      const auto out = seaice::run_matrix(m, root, [](const std::string& s) { std::cerr << s << std::endl; });
      print_rows(out.rows);
      std::cout << (root / "summary.csv").string() << "\n";
      return out.failures == 0 ? kOk : kPartial;
    }
    if (*detect) {
      std::optional<seaice::DetectorParams> params;
      if (quantile) {
        params = seaice::load_run_config(std::filesystem::path(detect_dir) / "config.toml").detector;
        params->threshold_quantile = *quantile;
      }
      const auto s = seaice::detect_run(detect_dir, params);
      std::printf("lkf %d, total length %.1f km, count sensitivity %d (q %.2f..%.2f)\n", s.stats.count,
                  s.stats.total_length_km, s.count_sensitivity, s.q_low, s.q_high);
      return kOk;
    }
    if (*summarize) {
      const std::filesystem::path root =
          summarize_dir.empty() ? seaice::resolve_output_root("runs", root_override) : std::filesystem::path(summarize_dir);
      const auto rows = seaice::summarize_root(root);
      const auto all = seaice::merge_summary_csv(root / "summary.csv", rows);
      seaice::write_plot_data(root, all);
      print_rows(rows);
      return kOk;
    }
    if (*grid_info) {
      const auto s = seaice::parse_staggering(g_stag);
      const seaice::Grid g = (g_nx > 0 || g_ny > 0)
                                 ? seaice::Grid::build(g_L_km * 1e3, g_nx > 0 ? g_nx : g_ny, g_ny > 0 ? g_ny : g_nx)
                                 : seaice::Grid::build(g_L_km * 1e3, g_h_km * 1e3);
      std::cout << seaice::grid_description(g, s) << "\n";
      return kOk;
    }
  } catch (const seaice::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}

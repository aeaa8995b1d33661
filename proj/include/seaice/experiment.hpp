#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "seaice/config.hpp"
#include "seaice/io.hpp"

namespace seaice {

/// Run directory layout:
///   config.toml     full config echo
///   run.json        status, dof counts, wall time, volume drift, git describe
///   telemetry.csv   one row per step
///   snap_<step>/    meta.json + raw fields
///   segments.csv, stats.csv   after detection
struct RunOutcome {
  fs::path dir;
  RunResult result;
  DofReport dofs;
};

/// Runs the benchmark, writing everything above except the detector outputs.
/// On BenchmarkFailure, run.json records the failure and the exception propagates.
RunOutcome run_to_directory(const RunConfig& cfg, const fs::path& dir);

/// Detects LKFs in the final shear snapshot of a run directory, writes
/// segments.csv and stats.csv. The sweep reruns the detector at
/// threshold_quantile -+ dq (clamped into (0,1)). `params` replaces the
/// detector settings of the run's config when given.
DetectionStats detect_run(const fs::path& run_dir, const std::optional<DetectorParams>& params = {},
                          double dq = 0.05);

/// One summary row from config.toml, run.json and stats.csv of a run directory.
SummaryRow summarize_run(const fs::path& run_dir);

/// Rows of every run directory directly below root, sorted.
std::vector<SummaryRow> summarize_root(const fs::path& root);

struct MatrixOutcome {
  std::vector<SummaryRow> rows;  // this matrix only, sorted
  int failures = 0;
};

/// Runs every config in a pool of m.workers threads, detects, merges the
/// rows into root/summary.csv and rewrites the plot data. A failing run gets
/// a row with its status and does not stop the others.
MatrixOutcome run_matrix(const ExperimentMatrix& m, const fs::path& root,
                         const std::function<void(const std::string&)>& log = {});

}  // namespace seaice

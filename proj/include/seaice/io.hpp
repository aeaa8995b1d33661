#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "seaice/benchmark.hpp"
#include "seaice/grid.hpp"
#include "seaice/lkf.hpp"

namespace seaice {

namespace fs = std::filesystem;

/// `git describe` of the source tree this library was built from.
std::string git_describe();

/// Raw little-endian float64, no header. read_field throws std::runtime_error
/// on a missing file or a size that is not a multiple of 8.
void write_field(const fs::path& file, std::span<const double> values);
std::vector<double> read_field(const fs::path& file);

/// JSON description of a grid and its dof counts for one staggering.
std::string grid_description(const Grid& grid, Staggering s);

struct FieldInfo {
  std::string name;      // file stem: <name>.bin
  std::string location;  // "cell", "element" or "point"
  std::string units;
  long count = 0;
};

/// Sidecar of one snapshot directory.
struct SnapshotMeta {
  int step = 0;
  double time_s = 0.0;
  Staggering staggering = Staggering::B;
  double L_m = 0.0;
  int nx = 0;
  int ny = 0;
  std::string git_describe;
  std::string config;  // full config echo
  std::vector<FieldInfo> fields;
};

/// Writes <dir>/meta.json and one .bin per field: shear (element), H and A
/// (cell), u and v (point).
void write_snapshot(const fs::path& dir, const Discretization& op, const Snapshot& snap, const std::string& config_echo);
SnapshotMeta read_snapshot_meta(const fs::path& dir);
std::vector<double> read_snapshot_field(const fs::path& dir, const std::string& name);

/// Snapshot directories (snap_<step>) of a run, by increasing step.
std::vector<fs::path> list_snapshots(const fs::path& run_dir);

void write_telemetry_csv(const fs::path& file, std::span<const StepTelemetry> rows);
std::vector<StepTelemetry> read_telemetry_csv(const fs::path& file);

/// id,length_km,mean_intensity,num_pixels,pixels with pixels as "x:y;x:y;..."
void write_segments_csv(const fs::path& file, std::span<const LKFSegment> segments);
std::vector<LKFSegment> read_segments_csv(const fs::path& file);

/// Detector statistics with the threshold-quantile sensitivity sweep.
struct DetectionStats {
  double threshold_quantile = 0.0;
  LKFStats stats;
  double q_low = 0.0;
  double q_high = 0.0;
  LKFStats at_q_low;
  LKFStats at_q_high;
  /// max |count(q +- dq) - count(q)|
  int count_sensitivity = 0;
};

void write_stats_csv(const fs::path& file, const DetectionStats& s);
DetectionStats read_stats_csv(const fs::path& file);

struct SummaryRow {
  std::string staggering;
  double h_km = 0.0;
  int nx = 0;
  int ny = 0;
  std::string solver;
  long velocity_dof = 0;
  long tracer_dof = 0;
  int lkf_count = 0;
  double lkf_total_length_km = 0.0;
  int count_sensitivity = 0;
  double wall_time_s = 0.0;
  std::string status = "ok";  // "ok" or a failure description
  std::string run;            // run directory name

  bool operator==(const SummaryRow&) const = default;
};

/// Deterministic order: staggering, h, nx, ny, solver, run; stable otherwise.
void sort_summary(std::vector<SummaryRow>& rows);
void write_summary_csv(const fs::path& file, std::span<const SummaryRow> rows);
std::vector<SummaryRow> read_summary_csv(const fs::path& file);
/// Append-only merge: the rows already in `file` are kept, rows not already
/// present verbatim are added, and the result is sorted and rewritten.
std::vector<SummaryRow> merge_summary_csv(const fs::path& file, std::span<const SummaryRow> rows);

/// Plot data, one CSV per figure axis: lkf_vs_h.csv and lkf_vs_dof.csv.
void write_plot_data(const fs::path& dir, std::span<const SummaryRow> rows);

}  // namespace seaice

#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "seaice/benchmark.hpp"
#include "seaice/lkf.hpp"

namespace seaice {

/// Everything one run needs: the benchmark, the detector applied to its final
/// shear, and where the outputs go.
struct RunConfig {
  BenchmarkConfig bench;
  DetectorParams detector;
  double pixel_km = 2.0;
  RegridMode regrid = RegridMode::AreaAverage;
  /// Run directory name below output_root; empty derives it from the settings.
  std::string name;
  std::string output_root = "runs";

  /// e.g. "CD1_h8km_64x64_mevp"
  std::string run_name() const;
  void validate() const;
};

/// Schema violation. keys() names every offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::vector<std::string> keys)
      : std::runtime_error(what), keys_(std::move(keys)) {}
  const std::vector<std::string>& keys() const { return keys_; }

 private:
  std::vector<std::string> keys_;
};

/// Dotted key ("solver.n_sub") -> values; more than one value means a list.
using KeyValues = std::vector<std::pair<std::string, std::vector<std::string>>>;

/// TOML-like text: `key = value`, `key = [a, b]`, `[section]`, `#` comments.
KeyValues parse_key_values(std::istream& in);
KeyValues read_key_values(const std::filesystem::path& file);

/// Schema check and conversion. Unknown keys, missing required keys
/// (staggering, h_km), lists and unparsable values are all reported together.
RunConfig run_config_from(const KeyValues& kv);
RunConfig load_run_config(const std::filesystem::path& file);

/// Canonical text of every key, in schema order; parses back to an equal config.
std::string echo_config(const RunConfig& cfg);

/// Names of all accepted run keys, in schema order.
std::vector<std::string> config_keys();

struct ExperimentMatrix {
  std::vector<RunConfig> runs;
  std::string output_root = "runs";
  int workers = 1;
};

/// Same keys as a run config, any of which may be a list; the runs are the
/// Cartesian product in key order. Extra keys:
///   workers  = concurrent runs (default 1)
///   same_dof = true adds, for every CD2 run on nx-by-ny cells, a B-grid run on
///              2nx-by-ny cells with the same velocity_dof.
/// Throws ConfigError when two runs would share an output directory.
ExperimentMatrix matrix_from(const KeyValues& kv);
ExperimentMatrix load_matrix(const std::filesystem::path& file);

/// Output root precedence: explicit override, then $SEAICE_OUTPUT_ROOT, then the config value.
std::filesystem::path resolve_output_root(const std::string& configured, const std::string& override_root = {});

}  // namespace seaice

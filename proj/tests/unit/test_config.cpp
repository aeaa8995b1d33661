#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <set>
#include <sstream>

#include "seaice/config.hpp"

using namespace seaice;

namespace {

KeyValues kv_of(const std::string& text) {
  std::istringstream in(text);
  return parse_key_values(in);
}

std::vector<std::string> error_keys(const std::string& text, bool matrix = false) {
  try {
    if (matrix) matrix_from(kv_of(text));
    else run_config_from(kv_of(text));
  } catch (const ConfigError& e) {
    return e.keys();
  }
  return {"<no error>"};
}

bool has(const std::vector<std::string>& v, const std::string& s) { return std::find(v.begin(), v.end(), s) != v.end(); }

}  // namespace

TEST_CASE("minimal run config takes the defaults") {
  const RunConfig c = run_config_from(kv_of("staggering = \"CD2\"\nh_km = 8\n"));
  CHECK(c.bench.staggering == Staggering::CD2);
  CHECK(c.bench.h == 8000.0);
  CHECK(c.bench.solver.scheme == Scheme::MEVP);
  CHECK(c.bench.solver.n_sub == 100);
  CHECK(c.detector.threshold_quantile == 0.85);
  CHECK(c.run_name() == "CD2_h8km_64x64_mevp");
}

TEST_CASE("sections and dotted keys") {
  const RunConfig c = run_config_from(kv_of("staggering = \"B\"\nh_km = 4\n[solver]\nn_sub = 250\n"
                                            "[detector]\nthreshold_quantile = 0.9\nregrid = \"nearest\"\n"));
  CHECK(c.bench.solver.n_sub == 250);
  CHECK(c.detector.threshold_quantile == 0.9);
  CHECK(c.regrid == RegridMode::Nearest);
  CHECK(c.bench.make_grid().nx() == 128);
}

TEST_CASE("schema errors name their keys") {
  CHECK(has(error_keys("h_km = 8\n"), "staggering"));
  const auto both = error_keys("solver = \"evp\"\n");
  CHECK(has(both, "staggering"));
  CHECK(has(both, "h_km"));
  CHECK(has(error_keys("staggering = \"B\"\nh_km = 8\nbogus = 1\n"), "bogus"));
  CHECK(has(error_keys("staggering = \"B\"\nh_km = 8\n[solver]\nnsub = 3\n"), "solver.nsub"));
  CHECK(has(error_keys("staggering = \"B\"\nh_km = [8, 4]\n"), "h_km"));
  CHECK(has(error_keys("staggering = \"B\"\nh_km = eight\n"), "h_km"));
  CHECK(has(error_keys("staggering = \"E\"\nh_km = 8\n"), "staggering"));
  CHECK(has(error_keys("staggering = \"B\"\nh_km = 8\nwind = maybe\n"), "wind"));
  CHECK(has(error_keys("staggering = \"B\"\nh_km = 8\nh_km = 4\n"), "h_km"));
  // matrix-only keys are unknown in a run file
  CHECK(has(error_keys("staggering = \"B\"\nh_km = 8\nworkers = 2\n"), "workers"));
  // semantic violations surface as config errors too
  CHECK_THROWS_AS(run_config_from(kv_of("staggering = \"B\"\nh_km = 7\n")), ConfigError);
  CHECK_THROWS_AS(run_config_from(kv_of("staggering = \"B\"\nh_km = 8\n[solver]\ncd1_gamma = -1\n")), ConfigError);
}

TEST_CASE("echo round trip") {
  RunConfig c = run_config_from(kv_of("staggering = \"CD1\"\nsolver = \"picard\"\nh_km = 16\n"));
  c.bench.solver.cd1_gamma = 0.3;
  c.bench.rheo.P_star = 27500.0 + 1.0 / 3.0;
  c.bench.cyclone.v_max = 0.1 + 0.2;
  c.detector.sigma_large = 4.75;
  c.name = "custom run";
  const std::string echo = echo_config(c);
  const RunConfig back = run_config_from(kv_of(echo));
  CHECK(echo_config(back) == echo);
  CHECK(back.bench.rheo.P_star == c.bench.rheo.P_star);
  CHECK(back.bench.cyclone.v_max == c.bench.cyclone.v_max);
  CHECK(back.bench.solver.cd1_gamma == 0.3);
  CHECK(back.name == "custom run");
  // every key appears in the echo
  for (const std::string& k : config_keys()) {
    const std::string leaf = k.substr(k.find('.') == std::string::npos ? 0 : k.find('.') + 1);
    CHECK(("\n" + echo).find("\n" + leaf + " = ") != std::string::npos);
  }
}

TEST_CASE("solver name resets per-scheme defaults, refinements apply after") {
  const RunConfig evp = run_config_from(kv_of("staggering = \"B\"\nh_km = 8\nsolver = \"evp\"\n"));
  CHECK(evp.bench.solver.scheme == Scheme::EVP);
  const RunConfig tuned =
      run_config_from(kv_of("staggering = \"B\"\nh_km = 8\nsolver = \"evp\"\n[solver]\nn_sub = 7\n"));
  CHECK(tuned.bench.solver.n_sub == 7);
  CHECK(tuned.bench.solver.scheme == Scheme::EVP);
}

TEST_CASE("matrix is the Cartesian product") {
  const ExperimentMatrix m = matrix_from(kv_of(
      "staggering = [\"B\", \"CD1\", \"CD2\"]\nh_km = [8, 16, 32]\nsolver = \"mevp\"\nworkers = 3\n"));
  CHECK(m.runs.size() == 9);
  CHECK(m.workers == 3);
  CHECK(m.runs[0].bench.staggering == Staggering::B);
  CHECK(m.runs[0].bench.h == 8000.0);
  CHECK(m.runs[1].bench.h == 16000.0);
  CHECK(m.runs[3].bench.staggering == Staggering::CD1);
  std::set<std::string> names;
  for (const auto& r : m.runs) names.insert(r.run_name());
  CHECK(names.size() == 9);
}

TEST_CASE("same-dof twins") {
  const ExperimentMatrix m = matrix_from(kv_of("staggering = [\"B\", \"CD2\"]\nh_km = 8\nsame_dof = true\n"));
  REQUIRE(m.runs.size() == 3);
  const RunConfig& twin = m.runs[2];
  CHECK(twin.bench.staggering == Staggering::B);
  CHECK(twin.bench.make_grid().nx() == 128);
  CHECK(twin.bench.make_grid().ny() == 64);
  CHECK(dof_counts(twin.bench.make_grid(), Staggering::B).velocity_dof ==
        dof_counts(m.runs[1].bench.make_grid(), Staggering::CD2).velocity_dof);
  // listing the twin explicitly does not run it twice
  const ExperimentMatrix d = matrix_from(kv_of("staggering = [\"CD2\", \"B\"]\nnx = [64, 128]\nny = 64\nh_km = 8\nsame_dof = true\n"));
  std::set<std::string> names;
  for (const auto& r : d.runs) names.insert(r.run_name());
  CHECK(names.size() == d.runs.size());
}

TEST_CASE("matrix rejects clashing output directories") {
  const auto keys = error_keys("staggering = \"B\"\nh_km = 8\nname = \"x\"\nsolver = [\"mevp\", \"evp\"]\n", true);
  REQUIRE(!keys.empty());
  CHECK(keys.front().find("x") != std::string::npos);
  CHECK(has(error_keys("staggering = \"B\"\nh_km = 8\nworkers = 0\n", true), "workers"));
  CHECK(has(error_keys("staggering = \"B\"\nh_km = 8\nfoo = [1, 2]\n", true), "foo"));
}

TEST_CASE("output root precedence") {
  ::unsetenv("SEAICE_OUTPUT_ROOT");
  CHECK(resolve_output_root("cfg") == "cfg");
  ::setenv("SEAICE_OUTPUT_ROOT", "env", 1);
  CHECK(resolve_output_root("cfg") == "env");
  CHECK(resolve_output_root("cfg", "flag") == "flag");
  ::setenv("SEAICE_OUTPUT_ROOT", "", 1);
  CHECK(resolve_output_root("cfg") == "cfg");
  ::unsetenv("SEAICE_OUTPUT_ROOT");
}

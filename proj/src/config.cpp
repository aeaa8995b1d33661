#include "seaice/config.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace seaice {

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

int to_int(const std::string& s) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw std::invalid_argument("not a boolean: '" + s + "'");
}

struct KeySpec {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class Ref>
KeySpec real(std::string name, Ref ref, double scale = 1.0) {
  return {std::move(name), [ref, scale](RunConfig& c, const std::string& s) { ref(c) = to_double(s) * scale; },
          [ref, scale](const RunConfig& c) { return fmt(ref(const_cast<RunConfig&>(c)) / scale); }};
}

template <class Ref>
KeySpec integer(std::string name, Ref ref) {
  return {std::move(name), [ref](RunConfig& c, const std::string& s) { ref(c) = to_int(s); },
          [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); }};
}

template <class Ref>
KeySpec boolean(std::string name, Ref ref) {
  return {std::move(name), [ref](RunConfig& c, const std::string& s) { ref(c) = to_bool(s); },
          [ref](const RunConfig& c) { return std::string(ref(const_cast<RunConfig&>(c)) ? "true" : "false"); }};
}

template <class Ref>
KeySpec text(std::string name, Ref ref) {
  return {std::move(name), [ref](RunConfig& c, const std::string& s) { ref(c) = s; },
          [ref](const RunConfig& c) { return ref(const_cast<RunConfig&>(c)); }};
}

// Schema order is echo order. "staggering" and "solver" come first because
// the solver name resets the per-scheme defaults the solver.* keys refine.
const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> keys = [] {
    std::vector<KeySpec> k;
    k.push_back({"staggering", [](RunConfig& c, const std::string& s) { c.bench.staggering = parse_staggering(s); },
                 [](const RunConfig& c) { return std::string(to_string(c.bench.staggering)); }});
    k.push_back({"solver",
                 [](RunConfig& c, const std::string& s) { c.bench.solver = SolverConfig::defaults(parse_scheme(s)); },
                 [](const RunConfig& c) { return std::string(to_string(c.bench.solver.scheme)); }});
    k.push_back(real("h_km", [](RunConfig& c) -> double& { return c.bench.h; }, 1e3));
    k.push_back(integer("nx", [](RunConfig& c) -> int& { return c.bench.nx; }));
    k.push_back(integer("ny", [](RunConfig& c) -> int& { return c.bench.ny; }));
    k.push_back(real("L_km", [](RunConfig& c) -> double& { return c.bench.L; }, 1e3));
    k.push_back(real("t_end_s", [](RunConfig& c) -> double& { return c.bench.T_end; }));
    k.push_back(real("dt_s", [](RunConfig& c) -> double& { return c.bench.dt; }));
    k.push_back(integer("output_every", [](RunConfig& c) -> int& { return c.bench.output_every; }));
    k.push_back(integer("quadrature_points", [](RunConfig& c) -> int& { return c.bench.quadrature_points; }));
    k.push_back(boolean("wind", [](RunConfig& c) -> bool& { return c.bench.wind_on; }));
    k.push_back(boolean("ocean", [](RunConfig& c) -> bool& { return c.bench.ocean_on; }));
    k.push_back(text("name", [](RunConfig& c) -> std::string& { return c.name; }));
    k.push_back(text("output_root", [](RunConfig& c) -> std::string& { return c.output_root; }));

    k.push_back(integer("solver.n_sub", [](RunConfig& c) -> int& { return c.bench.solver.n_sub; }));
    k.push_back(real("solver.T_evp_s", [](RunConfig& c) -> double& { return c.bench.solver.T_evp; }));
    k.push_back(real("solver.alpha", [](RunConfig& c) -> double& { return c.bench.solver.alpha; }));
    k.push_back(real("solver.beta", [](RunConfig& c) -> double& { return c.bench.solver.beta; }));
    k.push_back(real("solver.picard_tol", [](RunConfig& c) -> double& { return c.bench.solver.picard_tol; }));
    k.push_back(integer("solver.picard_max", [](RunConfig& c) -> int& { return c.bench.solver.picard_max; }));
    k.push_back(integer("solver.picard_anderson", [](RunConfig& c) -> int& { return c.bench.solver.picard_anderson; }));
    k.push_back(real("solver.linear_tol", [](RunConfig& c) -> double& { return c.bench.solver.linear_tol; }));
    k.push_back(text("solver.linear_solver", [](RunConfig& c) -> std::string& { return c.bench.solver.linear_solver; }));
    k.push_back(real("solver.cd1_gamma", [](RunConfig& c) -> double& { return c.bench.solver.cd1_gamma; }));

    k.push_back(real("rheology.rho_ice", [](RunConfig& c) -> double& { return c.bench.rheo.rho_ice; }));
    k.push_back(real("rheology.P_star", [](RunConfig& c) -> double& { return c.bench.rheo.P_star; }));
    k.push_back(real("rheology.C", [](RunConfig& c) -> double& { return c.bench.rheo.C; }));
    k.push_back(real("rheology.e", [](RunConfig& c) -> double& { return c.bench.rheo.e; }));
    k.push_back(real("rheology.Delta_min", [](RunConfig& c) -> double& { return c.bench.rheo.Delta_min; }));
    k.push_back(real("rheology.pressure_factor", [](RunConfig& c) -> double& { return c.bench.rheo.pressure_factor; }));

    k.push_back(real("forcing.f_c", [](RunConfig& c) -> double& { return c.bench.forcing.f_c; }));
    k.push_back(real("forcing.rho_a", [](RunConfig& c) -> double& { return c.bench.forcing.rho_a; }));
    k.push_back(real("forcing.C_a", [](RunConfig& c) -> double& { return c.bench.forcing.C_a; }));
    k.push_back(real("forcing.rho_o", [](RunConfig& c) -> double& { return c.bench.forcing.rho_o; }));
    k.push_back(real("forcing.C_o", [](RunConfig& c) -> double& { return c.bench.forcing.C_o; }));
    k.push_back(real("forcing.g", [](RunConfig& c) -> double& { return c.bench.forcing.g; }));
    k.push_back(real("forcing.ocean_vmax", [](RunConfig& c) -> double& { return c.bench.ocean_vmax; }));

    k.push_back(real("cyclone.x0_km", [](RunConfig& c) -> double& { return c.bench.cyclone.c0.x; }, 1e3));
    k.push_back(real("cyclone.y0_km", [](RunConfig& c) -> double& { return c.bench.cyclone.c0.y; }, 1e3));
    k.push_back(real("cyclone.x1_km", [](RunConfig& c) -> double& { return c.bench.cyclone.c1.x; }, 1e3));
    k.push_back(real("cyclone.y1_km", [](RunConfig& c) -> double& { return c.bench.cyclone.c1.y; }, 1e3));
    k.push_back(real("cyclone.v_max", [](RunConfig& c) -> double& { return c.bench.cyclone.v_max; }));
    k.push_back(real("cyclone.r_scale_km", [](RunConfig& c) -> double& { return c.bench.cyclone.r_scale; }, 1e3));
    k.push_back(real("cyclone.alpha_conv_deg", [](RunConfig& c) -> double& { return c.bench.cyclone.alpha_conv_deg; }));

    k.push_back(real("detector.pixel_km", [](RunConfig& c) -> double& { return c.pixel_km; }));
    k.push_back({"detector.regrid",
                 [](RunConfig& c, const std::string& s) {
                   if (s == "area") c.regrid = RegridMode::AreaAverage;
                   else if (s == "nearest") c.regrid = RegridMode::Nearest;
                   else throw std::invalid_argument("expected area or nearest, got '" + s + "'");
                 },
                 [](const RunConfig& c) { return std::string(c.regrid == RegridMode::Nearest ? "nearest" : "area"); }});
    k.push_back(real("detector.log_floor", [](RunConfig& c) -> double& { return c.detector.log_floor; }));
    k.push_back(real("detector.sigma_small", [](RunConfig& c) -> double& { return c.detector.sigma_small; }));
    k.push_back(real("detector.sigma_large", [](RunConfig& c) -> double& { return c.detector.sigma_large; }));
    k.push_back(real("detector.threshold_quantile", [](RunConfig& c) -> double& { return c.detector.threshold_quantile; }));
    k.push_back(integer("detector.min_length_px", [](RunConfig& c) -> int& { return c.detector.min_length_px; }));
    k.push_back(integer("detector.min_width_px", [](RunConfig& c) -> int& { return c.detector.min_width_px; }));
    return k;
  }();
  return keys;
}

const KeySpec* find_key(const std::string& name) {
  for (const KeySpec& k : schema())
    if (k.name == name) return &k;
  return nullptr;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
  return out;
}

const std::set<std::string> kMatrixOnly = {"workers", "same_dof"};

// Applies scalar assignments in schema order; collects every problem.
RunConfig apply(const std::map<std::string, std::string>& values) {
  std::vector<std::string> bad;
  std::vector<std::string> why;
  RunConfig cfg;
  for (const KeySpec& k : schema()) {
    const auto it = values.find(k.name);
    if (it == values.end()) continue;
    try {
      k.set(cfg, it->second);
    } catch (const std::exception& e) {
      bad.push_back(k.name);
      why.push_back(k.name + ": " + e.what());
    }
  }
  if (!bad.empty()) throw ConfigError("invalid values: " + join(why), bad);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid config: ") + e.what(), {});
  }
  return cfg;
}

void check_keys(const KeyValues& kv, bool matrix) {
  std::vector<std::string> unknown;
  std::set<std::string> seen;
  std::vector<std::string> repeated;
  for (const auto& [key, vals] : kv) {
    if (!find_key(key) && !(matrix && kMatrixOnly.count(key))) unknown.push_back(key);
    if (!seen.insert(key).second) repeated.push_back(key);
  }
  if (!unknown.empty()) throw ConfigError("unknown keys: " + join(unknown), unknown);
  if (!repeated.empty()) throw ConfigError("keys given twice: " + join(repeated), repeated);
  std::vector<std::string> missing;
  for (const char* req : {"staggering", "h_km"})
    if (!seen.count(req)) missing.push_back(req);
  if (!missing.empty()) throw ConfigError("missing required keys: " + join(missing), missing);
}

}  // namespace

std::string RunConfig::run_name() const {
  if (!name.empty()) return name;
  const Grid g = bench.make_grid();
  std::ostringstream s;
  s << to_string(bench.staggering) << "_h" << fmt(bench.h / 1e3) << "km_" << g.nx() << "x" << g.ny() << "_"
    << to_string(bench.solver.scheme);
  return s.str();
}

void RunConfig::validate() const {
  bench.validate();
  detector.validate();
  if (!(pixel_km > 0.0)) throw std::invalid_argument("detector: pixel_km must be positive");
  if (output_root.empty()) throw std::invalid_argument("output_root must not be empty");
}

KeyValues parse_key_values(std::istream& in) {
  KeyValues out;
  for (const CLI::ConfigItem& item : CLI::ConfigTOML().from_config(in)) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    out.emplace_back(item.fullname(), item.inputs);
  }
  return out;
}

KeyValues read_key_values(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string(), {});
  return parse_key_values(in);
}

RunConfig run_config_from(const KeyValues& kv) {
  check_keys(kv, false);
  std::map<std::string, std::string> values;
  std::vector<std::string> lists;
  for (const auto& [key, vals] : kv) {
    if (vals.size() != 1) lists.push_back(key);
    else values[key] = vals.front();
  }
  if (!lists.empty()) throw ConfigError("lists are only allowed in matrix files: " + join(lists), lists);
  return apply(values);
}

RunConfig load_run_config(const std::filesystem::path& file) { return run_config_from(read_key_values(file)); }

std::string echo_config(const RunConfig& cfg) {
  std::ostringstream out;
  std::string section;
  for (const KeySpec& k : schema()) {
    const auto dot = k.name.find('.');
    const std::string sec = dot == std::string::npos ? "" : k.name.substr(0, dot);
    const std::string leaf = dot == std::string::npos ? k.name : k.name.substr(dot + 1);
    if (sec != section) {
      out << "\n[" << sec << "]\n";
      section = sec;
    }
    const std::string v = k.get(cfg);
    const bool quote = k.name == "name" || k.name == "output_root" || k.name == "solver.linear_solver" ||
                       k.name == "staggering" || k.name == "solver" || k.name == "detector.regrid";
    out << leaf << " = " << (quote ? "\"" + v + "\"" : v) << "\n";
  }
  return out.str();
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const KeySpec& k : schema()) out.push_back(k.name);
  return out;
}

ExperimentMatrix matrix_from(const KeyValues& kv) {
  check_keys(kv, true);
  ExperimentMatrix m;
  bool same_dof = false;
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  for (const auto& [key, vals] : kv) {
    try {
      if (key == "workers") {
        if (vals.size() != 1) throw std::invalid_argument("must be a single value");
        m.workers = to_int(vals.front());
        if (m.workers < 1) throw std::invalid_argument("must be >= 1");
      } else if (key == "same_dof") {
        if (vals.size() != 1) throw std::invalid_argument("must be a single value");
        same_dof = to_bool(vals.front());
      } else {
        if (vals.empty()) throw std::invalid_argument("empty list");
        axes.emplace_back(key, vals);
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key + ": " + e.what(), {key});
    }
  }

  // Cartesian product, first key varying slowest.
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    std::map<std::string, std::string> values;
    for (std::size_t a = 0; a < axes.size(); ++a) values[axes[a].first] = axes[a].second[idx[a]];
    RunConfig cfg = apply(values);
    m.runs.push_back(cfg);
    if (same_dof && cfg.bench.staggering == Staggering::CD2) {
      const Grid g = cfg.bench.make_grid();
      RunConfig twin = cfg;
      twin.bench.staggering = Staggering::B;
      twin.bench.nx = 2 * g.nx();
      twin.bench.ny = g.ny();
      twin.name.clear();
      m.runs.push_back(twin);
    }
    int a = static_cast<int>(axes.size()) - 1;
    while (a >= 0 && ++idx[a] == axes[a].second.size()) idx[a--] = 0;
    if (a < 0) break;
  }

  // Drop exact duplicates (e.g. a same-dof twin listed explicitly), then
  // require distinct output directories.
  std::vector<RunConfig> unique;
  std::set<std::string> echoes;
  for (auto& r : m.runs)
    if (echoes.insert(echo_config(r)).second) unique.push_back(std::move(r));
  m.runs = std::move(unique);
  std::map<std::string, int> dirs;
  std::vector<std::string> clashes;
  for (const auto& r : m.runs) {
    const std::string d = r.output_root + "/" + r.run_name();
    if (++dirs[d] == 2) clashes.push_back(d);
  }
  if (!clashes.empty()) throw ConfigError("runs share an output directory: " + join(clashes), clashes);
  m.output_root = m.runs.front().output_root;
  for (const auto& r : m.runs)
    if (r.output_root != m.output_root) throw ConfigError("output_root must be a single value", {"output_root"});
  return m;
}

ExperimentMatrix load_matrix(const std::filesystem::path& file) { return matrix_from(read_key_values(file)); }

std::filesystem::path resolve_output_root(const std::string& configured, const std::string& override_root) {
  if (!override_root.empty()) return override_root;
  if (const char* env = std::getenv("SEAICE_OUTPUT_ROOT"); env && *env) return env;
  return configured;
}

}  // namespace seaice

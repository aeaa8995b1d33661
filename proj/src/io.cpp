#include "seaice/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#ifndef SEAICE_GIT_DESCRIBE
#define SEAICE_GIT_DESCRIBE "unknown"
#endif

namespace seaice {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class T>
T parse_num(std::string_view s, const char* what) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::runtime_error(std::string("bad ") + what + " value '" + std::string(s) + "'");
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::ofstream open_out(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  return out;
}

std::ifstream open_in(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  return in;
}

// Rows of a CSV with a header line; the header must match exactly.
std::vector<std::vector<std::string>> read_csv(const fs::path& file, const std::string& header) {
  std::ifstream in = open_in(file);
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw std::runtime_error(file.string() + ": unexpected header");
  const std::size_t ncol = split(header, ',').size();
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cols = split(line, ',');
    if (cols.size() != ncol) throw std::runtime_error(file.string() + ": wrong column count");
    rows.push_back(std::move(cols));
  }
  return rows;
}

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\n") != std::string::npos) throw std::invalid_argument("csv: field contains a separator");
  return s;
}

}  // namespace

std::string git_describe() { return SEAICE_GIT_DESCRIBE; }

void write_field(const fs::path& file, std::span<const double> values) {
  std::ofstream out = open_out(file);
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
  } else {
    for (double v : values) {
      std::uint64_t u = std::bit_cast<std::uint64_t>(v);
      u = __builtin_bswap64(u);
      out.write(reinterpret_cast<const char*>(&u), 8);
    }
  }
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

std::vector<double> read_field(const fs::path& file) {
  std::ifstream in = open_in(file);
  const auto bytes = static_cast<std::size_t>(fs::file_size(file));
  if (bytes % 8 != 0) throw std::runtime_error(file.string() + ": size is not a multiple of 8");
  std::vector<double> v(bytes / 8);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw std::runtime_error("read failed: " + file.string());
  if constexpr (std::endian::native != std::endian::little) {
    for (double& x : v) x = std::bit_cast<double>(__builtin_bswap64(std::bit_cast<std::uint64_t>(x)));
  }
  return v;
}

std::string grid_description(const Grid& grid, Staggering s) {
  const DofReport d = dof_counts(grid, s);
  json j;
  j["staggering"] = std::string(to_string(s));
  j["L_m"] = grid.length();
  j["nx"] = grid.nx();
  j["ny"] = grid.ny();
  j["hx_m"] = grid.hx();
  j["hy_m"] = grid.hy();
  j["cells"] = grid.num_cells();
  j["vertices"] = grid.num_vertices();
  j["edges"] = grid.num_edges();
  j["velocity_dof"] = d.velocity_dof;
  j["velocity_dof_total"] = d.velocity_dof_total;
  j["velocity_dof_free"] = d.velocity_dof_free;
  j["tracer_dof"] = d.tracer_dof;
  return j.dump(2);
}

void write_snapshot(const fs::path& dir, const Discretization& op, const Snapshot& snap, const std::string& config_echo) {
  fs::create_directories(dir);
  const State& st = *snap.state;
  std::vector<double> u(st.v.size());
  std::vector<double> w(st.v.size());
  for (std::size_t p = 0; p < st.v.size(); ++p) {
    u[p] = st.v[p].x;
    w[p] = st.v[p].y;
  }
  const std::vector<FieldInfo> fields = {
      {"shear", "element", "1/s", static_cast<long>(snap.shear.size())},
      {"H", "cell", "m", static_cast<long>(st.H.size())},
      {"A", "cell", "1", static_cast<long>(st.A.size())},
      {"u", "point", "m/s", static_cast<long>(u.size())},
      {"v", "point", "m/s", static_cast<long>(w.size())},
  };
  write_field(dir / "shear.bin", snap.shear);
  write_field(dir / "H.bin", st.H);
  write_field(dir / "A.bin", st.A);
  write_field(dir / "u.bin", u);
  write_field(dir / "v.bin", w);

  json j;
  j["step"] = snap.step;
  j["time_s"] = snap.time;
  j["staggering"] = std::string(to_string(op.staggering));
  j["grid"] = {{"L_m", op.grid.length()}, {"nx", op.grid.nx()}, {"ny", op.grid.ny()}};
  j["byte_order"] = "little";
  j["dtype"] = "float64";
  j["git_describe"] = git_describe();
  j["config"] = config_echo;
  for (const FieldInfo& f : fields)
    j["fields"].push_back({{"name", f.name}, {"location", f.location}, {"units", f.units}, {"count", f.count}});
  open_out(dir / "meta.json") << j.dump(2) << "\n";
}

SnapshotMeta read_snapshot_meta(const fs::path& dir) {
  std::ifstream in = open_in(dir / "meta.json");
  const json j = json::parse(in);
  SnapshotMeta m;
  m.step = j.at("step").get<int>();
  m.time_s = j.at("time_s").get<double>();
  m.staggering = parse_staggering(j.at("staggering").get<std::string>());
  m.L_m = j.at("grid").at("L_m").get<double>();
  m.nx = j.at("grid").at("nx").get<int>();
  m.ny = j.at("grid").at("ny").get<int>();
  m.git_describe = j.at("git_describe").get<std::string>();
  m.config = j.at("config").get<std::string>();
  for (const auto& f : j.at("fields"))
    m.fields.push_back({f.at("name").get<std::string>(), f.at("location").get<std::string>(),
                        f.at("units").get<std::string>(), f.at("count").get<long>()});
  return m;
}

std::vector<double> read_snapshot_field(const fs::path& dir, const std::string& name) {
  const SnapshotMeta m = read_snapshot_meta(dir);
  for (const FieldInfo& f : m.fields) {
    if (f.name != name) continue;
    std::vector<double> v = read_field(dir / (name + ".bin"));
    if (static_cast<long>(v.size()) != f.count)
      throw std::runtime_error((dir / (name + ".bin")).string() + ": size disagrees with meta.json");
    return v;
  }
  throw std::runtime_error(dir.string() + ": no field '" + name + "'");
}

std::vector<fs::path> list_snapshots(const fs::path& run_dir) {
  std::vector<std::pair<int, fs::path>> found;
  if (!fs::is_directory(run_dir)) return {};
  for (const auto& entry : fs::directory_iterator(run_dir)) {
    const std::string n = entry.path().filename().string();
    if (!entry.is_directory() || n.rfind("snap_", 0) != 0) continue;
    if (!fs::exists(entry.path() / "meta.json")) continue;
    try {
      found.emplace_back(parse_num<int>(n.substr(5), "step"), entry.path());
    } catch (const std::runtime_error&) {
    }
  }
  std::sort(found.begin(), found.end());
  std::vector<fs::path> out;
  for (auto& [s, p] : found) out.push_back(p);
  return out;
}

namespace {
const std::string kTelemetryHeader =
    "step,time_s,iterations,residual,converged,max_speed,volume,min_H,min_A,max_A,courant";
const std::string kSegmentsHeader = "id,length_km,mean_intensity,num_pixels,pixels";
const std::string kStatsHeader =
    "threshold_quantile,lkf_count,lkf_total_length_km,q_low,count_q_low,length_q_low,q_high,count_q_high,"
    "length_q_high,count_sensitivity";
const std::string kSummaryHeader =
    "staggering,h_km,nx,ny,solver,velocity_dof,tracer_dof,lkf_count,lkf_total_length_km,count_sensitivity,"
    "wall_time_s,status,run";
}  // namespace

void write_telemetry_csv(const fs::path& file, std::span<const StepTelemetry> rows) {
  std::ofstream out = open_out(file);
  out << kTelemetryHeader << "\n";
  for (const StepTelemetry& t : rows)
    out << t.step << ',' << num(t.time) << ',' << t.iterations << ',' << num(t.residual) << ','
        << (t.converged ? 1 : 0) << ',' << num(t.max_speed) << ',' << num(t.volume) << ',' << num(t.min_H) << ','
        << num(t.min_A) << ',' << num(t.max_A) << ',' << num(t.courant) << "\n";
}

std::vector<StepTelemetry> read_telemetry_csv(const fs::path& file) {
  std::vector<StepTelemetry> out;
  for (const auto& c : read_csv(file, kTelemetryHeader)) {
    StepTelemetry t;
    t.step = parse_num<int>(c[0], "step");
    t.time = parse_num<double>(c[1], "time_s");
    t.iterations = parse_num<int>(c[2], "iterations");
    t.residual = parse_num<double>(c[3], "residual");
    t.converged = parse_num<int>(c[4], "converged") != 0;
    t.max_speed = parse_num<double>(c[5], "max_speed");
    t.volume = parse_num<double>(c[6], "volume");
    t.min_H = parse_num<double>(c[7], "min_H");
    t.min_A = parse_num<double>(c[8], "min_A");
    t.max_A = parse_num<double>(c[9], "max_A");
    t.courant = parse_num<double>(c[10], "courant");
    out.push_back(t);
  }
  return out;
}

void write_segments_csv(const fs::path& file, std::span<const LKFSegment> segments) {
  std::ofstream out = open_out(file);
  out << kSegmentsHeader << "\n";
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const LKFSegment& s = segments[i];
    out << i << ',' << num(s.length_km) << ',' << num(s.mean_intensity) << ',' << s.pixels.size() << ',';
    for (std::size_t k = 0; k < s.pixels.size(); ++k) out << (k ? ";" : "") << s.pixels[k].x << ':' << s.pixels[k].y;
    out << "\n";
  }
}

std::vector<LKFSegment> read_segments_csv(const fs::path& file) {
  std::vector<LKFSegment> out;
  for (const auto& c : read_csv(file, kSegmentsHeader)) {
    LKFSegment s;
    s.length_km = parse_num<double>(c[1], "length_km");
    s.mean_intensity = parse_num<double>(c[2], "mean_intensity");
    const auto n = parse_num<std::size_t>(c[3], "num_pixels");
    for (const std::string& xy : split(c[4], ';')) {
      const auto colon = xy.find(':');
      if (colon == std::string::npos) throw std::runtime_error(file.string() + ": bad pixel '" + xy + "'");
      s.pixels.push_back({parse_num<int>(std::string_view(xy).substr(0, colon), "pixel"),
                          parse_num<int>(std::string_view(xy).substr(colon + 1), "pixel")});
    }
    if (s.pixels.size() != n) throw std::runtime_error(file.string() + ": pixel count mismatch");
    out.push_back(std::move(s));
  }
  return out;
}

void write_stats_csv(const fs::path& file, const DetectionStats& s) {
  std::ofstream out = open_out(file);
  out << kStatsHeader << "\n"
      << num(s.threshold_quantile) << ',' << s.stats.count << ',' << num(s.stats.total_length_km) << ','
      << num(s.q_low) << ',' << s.at_q_low.count << ',' << num(s.at_q_low.total_length_km) << ',' << num(s.q_high)
      << ',' << s.at_q_high.count << ',' << num(s.at_q_high.total_length_km) << ',' << s.count_sensitivity << "\n";
}

DetectionStats read_stats_csv(const fs::path& file) {
  const auto rows = read_csv(file, kStatsHeader);
  if (rows.size() != 1) throw std::runtime_error(file.string() + ": expected one row");
  const auto& c = rows.front();
  DetectionStats s;
  s.threshold_quantile = parse_num<double>(c[0], "threshold_quantile");
  s.stats.count = parse_num<int>(c[1], "lkf_count");
  s.stats.total_length_km = parse_num<double>(c[2], "lkf_total_length_km");
  s.q_low = parse_num<double>(c[3], "q_low");
  s.at_q_low.count = parse_num<int>(c[4], "count_q_low");
  s.at_q_low.total_length_km = parse_num<double>(c[5], "length_q_low");
  s.q_high = parse_num<double>(c[6], "q_high");
  s.at_q_high.count = parse_num<int>(c[7], "count_q_high");
  s.at_q_high.total_length_km = parse_num<double>(c[8], "length_q_high");
  s.count_sensitivity = parse_num<int>(c[9], "count_sensitivity");
  return s;
}

void sort_summary(std::vector<SummaryRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
    return std::tie(a.staggering, a.h_km, a.nx, a.ny, a.solver, a.run) <
           std::tie(b.staggering, b.h_km, b.nx, b.ny, b.solver, b.run);
  });
}

void write_summary_csv(const fs::path& file, std::span<const SummaryRow> rows) {
  std::ofstream out = open_out(file);
  out << kSummaryHeader << "\n";
  for (const SummaryRow& r : rows)
    out << csv_text(r.staggering) << ',' << num(r.h_km) << ',' << r.nx << ',' << r.ny << ',' << csv_text(r.solver)
        << ',' << r.velocity_dof << ',' << r.tracer_dof << ',' << r.lkf_count << ',' << num(r.lkf_total_length_km)
        << ',' << r.count_sensitivity << ',' << num(r.wall_time_s) << ',' << csv_text(r.status) << ','
        << csv_text(r.run) << "\n";
}

std::vector<SummaryRow> read_summary_csv(const fs::path& file) {
  std::vector<SummaryRow> out;
  for (const auto& c : read_csv(file, kSummaryHeader)) {
    SummaryRow r;
    r.staggering = c[0];
    r.h_km = parse_num<double>(c[1], "h_km");
    r.nx = parse_num<int>(c[2], "nx");
    r.ny = parse_num<int>(c[3], "ny");
    r.solver = c[4];
    r.velocity_dof = parse_num<long>(c[5], "velocity_dof");
    r.tracer_dof = parse_num<long>(c[6], "tracer_dof");
    r.lkf_count = parse_num<int>(c[7], "lkf_count");
    r.lkf_total_length_km = parse_num<double>(c[8], "lkf_total_length_km");
    r.count_sensitivity = parse_num<int>(c[9], "count_sensitivity");
    r.wall_time_s = parse_num<double>(c[10], "wall_time_s");
    r.status = c[11];
    r.run = c[12];
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SummaryRow> merge_summary_csv(const fs::path& file, std::span<const SummaryRow> rows) {
  std::vector<SummaryRow> all = fs::exists(file) ? read_summary_csv(file) : std::vector<SummaryRow>{};
  for (const SummaryRow& r : rows)
    if (std::find(all.begin(), all.end(), r) == all.end()) all.push_back(r);
  sort_summary(all);
  write_summary_csv(file, all);
  return all;
}

void write_plot_data(const fs::path& dir, std::span<const SummaryRow> rows) {
  std::vector<SummaryRow> ok;
  for (const SummaryRow& r : rows)
    if (r.status == "ok") ok.push_back(r);
  sort_summary(ok);
  std::ofstream vh = open_out(dir / "lkf_vs_h.csv");
  vh << "staggering,solver,h_km,nx,ny,lkf_count,lkf_total_length_km\n";
  for (const SummaryRow& r : ok)
    vh << r.staggering << ',' << r.solver << ',' << num(r.h_km) << ',' << r.nx << ',' << r.ny << ',' << r.lkf_count
       << ',' << num(r.lkf_total_length_km) << "\n";
  std::vector<SummaryRow> by_dof = ok;
  std::stable_sort(by_dof.begin(), by_dof.end(), [](const SummaryRow& a, const SummaryRow& b) {
    return std::tie(a.staggering, a.solver, a.velocity_dof) < std::tie(b.staggering, b.solver, b.velocity_dof);
  });
  std::ofstream vd = open_out(dir / "lkf_vs_dof.csv");
  vd << "staggering,solver,velocity_dof,nx,ny,lkf_count,lkf_total_length_km\n";
  for (const SummaryRow& r : by_dof)
    vd << r.staggering << ',' << r.solver << ',' << r.velocity_dof << ',' << r.nx << ',' << r.ny << ','
       << r.lkf_count << ',' << num(r.lkf_total_length_km) << "\n";
}

}  // namespace seaice

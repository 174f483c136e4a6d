#include "h2dyn/output.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "h2dyn/error.hpp"
#include "h2dyn/units.hpp"

namespace h2dyn {

namespace fs = std::filesystem;

std::string code_version() { return H2DYN_VERSION; }

std::string RunMetadata::header(std::string_view comment) const {
  std::string out;
  out += fmt::format("{}label: {}\n", comment, label);
  out += fmt::format("{}code_version: {}\n", comment, code_version());
  out += fmt::format("{}config_digest: {}\n", comment, to_hex(config_digest));
  if (!table_digest.empty()) out += fmt::format("{}table_digest: {}\n", comment, table_digest);
  for (const auto& [k, v] : extra) out += fmt::format("{}{}: {}\n", comment, k, v);
  return out;
}

std::string csv_number(double v) { return fmt::format("{:.15e}", v); }

namespace {

void write_f64(std::ostream& out, double v) {
  unsigned char b[8];
  std::memcpy(b, &v, 8);
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + 8);
  out.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64(const char* p) {
  unsigned char b[8];
  std::memcpy(b, p, 8);
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + 8);
  double v;
  std::memcpy(&v, b, 8);
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

// Keeps the comment header, the column line and data rows whose first field
// is <= t_keep, and returns the retained text.
std::string retained_prefix(const fs::path& path, double t_keep) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot resume: " + path.string() + " is missing");
  std::string out, line;
  bool columns_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') {
      out += line + '\n';
      continue;
    }
    if (!columns_seen) {
      columns_seen = true;
      out += line + '\n';
      continue;
    }
    const double t = std::stod(line.substr(0, line.find(',')));
    if (t > t_keep) break;
    out += line + '\n';
  }
  return out;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::trunc) {
  std::ofstream out(path, std::ios::binary | mode);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Resume tolerance on stored sample times.
constexpr double t_eps = 1e-9;

}  // namespace

const std::vector<std::string>& TimeSeriesWriter::columns() {
  static const std::vector<std::string> c = {
      "t_au",        "t_fs",        "field_au",    "P0",         "P1",
      "P2",          "norm",        "absorbed_cum", "absorbed_G0", "absorbed_G1",
      "absorbed_G2", "P1_plus_absorbed", "P2_plus_absorbed", "dipole_z"};
  return c;
}

TimeSeriesWriter::TimeSeriesWriter(const fs::path& path, const RunMetadata& meta, std::optional<double> resume_t) {
  if (resume_t) {
    const std::string keep = retained_prefix(path, *resume_t + t_eps);
    out_ = open_out(path);
    out_ << keep;
    return;
  }
  out_ = open_out(path);
  out_ << meta.header();
  std::string line;
  for (const auto& c : columns()) line += (line.empty() ? "" : ",") + c;
  out_ << line << '\n';
}

void TimeSeriesWriter::write(const TimeSeriesRow& r) {
  const double abs_cum = r.absorbed[0] + r.absorbed[1] + r.absorbed[2];
  const double vals[] = {r.t_au, r.t_au * units::fs_per_au_time, r.field_au, r.P[0], r.P[1], r.P[2], r.norm,
                         abs_cum, r.absorbed[0], r.absorbed[1], r.absorbed[2], r.P[1] + r.absorbed[1],
                         r.P[2] + r.absorbed[2], r.dipole};
  std::string line;
  for (double v : vals) {
    if (!line.empty()) line += ',';
    line += csv_number(v);
  }
  out_ << line << '\n';
}

std::vector<double> TimeSeriesTable::column(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw IoError(fmt::format("time series has no column '{}'", name));
  const auto c = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(c));
  return out;
}

TimeSeriesTable read_timeseries(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  TimeSeriesTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (t.columns.empty()) {
      t.columns = split(line, ',');
      continue;
    }
    std::vector<double> row;
    for (const auto& f : split(line, ',')) row.push_back(std::stod(f));
    if (row.size() != t.columns.size()) throw IoError(path.string() + ": ragged row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

NuclearMapWriter::NuclearMapWriter(const fs::path& dir, const std::vector<double>& R, const RunMetadata& meta,
                                   std::optional<double> resume_t)
    : dir_(dir), R_(R), meta_(meta) {
  const fs::path times = dir_ / "P_map_times.csv";
  if (resume_t) {
    const std::string keep = retained_prefix(times, *resume_t + t_eps);
    for (const auto& l : split(keep, '\n'))
      if (!l.empty() && l[0] != '#' && l.rfind("t_au", 0) != 0) ++rows_;
    times_ = open_out(times);
    times_ << keep;
    for (int k = 0; k < 3; ++k) {
      const fs::path p = dir_ / fmt::format("P{}_map.f64", k);
      fs::resize_file(p, rows_ * R_.size() * 8);
      bin_[k] = open_out(p, std::ios::app);
    }
    return;
  }
  times_ = open_out(times);
  times_ << meta_.header() << "t_au,t_fs\n";
  for (int k = 0; k < 3; ++k) bin_[k] = open_out(dir_ / fmt::format("P{}_map.f64", k));
}

void NuclearMapWriter::write(double t, const std::array<NuclearDistribution, 3>& P) {
  for (int k = 0; k < 3; ++k) {
    if (P[k].values.size() != R_.size()) throw UsageError("nuclear map row has the wrong length");
    for (double v : P[k].values) write_f64(bin_[k], v);
    bin_[k].flush();
  }
  times_ << csv_number(t) << ',' << csv_number(t * units::fs_per_au_time) << '\n';
  times_.flush();
  ++rows_;
}

void NuclearMapWriter::finish() {
  for (auto& b : bin_) b.flush();
  times_.flush();
  for (int k = 0; k < 3; ++k) {
    std::ofstream side = open_out(dir_ / fmt::format("P{}_map.txt", k));
    side << meta_.header();
    side << fmt::format(
        "file: P{}_map.f64\n"
        "quantity: P{}(R, t), integral over region {} of |psi|^2 dz1 dz2 (per bohr)\n"
        "dtype: float64 little-endian\n"
        "shape: {} x {} (time rows, R columns; row-major)\n"
        "times: P_map_times.csv\n"
        "R_first_bohr: {}\nR_step_bohr: {}\n",
        k, k, k, rows_, R_.size(), csv_number(R_.front()),
        csv_number(R_.size() > 1 ? R_[1] - R_[0] : 0.0));
  }
}

NuclearMap read_nuclear_map(const fs::path& dir, int k) {
  NuclearMap m;
  const std::string side = slurp(dir / fmt::format("P{}_map.txt", k));
  std::size_t rows = 0, cols = 0;
  double R0 = 0.0, dR = 0.0;
  for (const auto& l : split(side, '\n')) {
    if (l.rfind("shape: ", 0) == 0) std::sscanf(l.c_str(), "shape: %zu x %zu", &rows, &cols);
    if (l.rfind("R_first_bohr: ", 0) == 0) R0 = std::stod(l.substr(14));
    if (l.rfind("R_step_bohr: ", 0) == 0) dR = std::stod(l.substr(13));
  }
  const std::string bin = slurp(dir / fmt::format("P{}_map.f64", k));
  if (bin.size() != rows * cols * 8) throw IoError(fmt::format("P{}_map.f64 size does not match its sidecar", k));
  for (std::size_t j = 0; j < cols; ++j) m.R.push_back(R0 + static_cast<double>(j) * dR);
  m.rows.assign(rows, std::vector<double>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m.rows[i][j] = read_f64(bin.data() + (i * cols + j) * 8);
  const auto times = read_timeseries(dir / "P_map_times.csv");
  m.t = times.column("t_au");
  if (m.t.size() != rows) throw IoError("P_map_times.csv does not match the map row count");
  return m;
}

void write_ker_csv(const fs::path& path, const KERSpectrum& s, const RunMetadata& meta) {
  std::ofstream out = open_out(path);
  out << meta.header();
  out << "# provenance: "
      << (s.provenance == KerProvenance::from_final_P2 ? "final_P2" : "final_P2_plus_absorbed_flux") << '\n';
  out << "# bin_width_eV: " << csv_number(s.bins() ? s.edges_eV[1] - s.edges_eV[0] : 0.0) << '\n';
  out << "E_eV,S_per_eV\n";
  for (std::size_t i = 0; i < s.bins(); ++i) out << csv_number(s.center_eV(i)) << ',' << csv_number(s.S_per_eV[i]) << '\n';
}

KERSpectrum read_ker_csv(const fs::path& path) {
  const auto t = read_timeseries(path);
  KERSpectrum s;
  const auto E = t.column("E_eV");
  s.S_per_eV = t.column("S_per_eV");
  const double w = E.size() > 1 ? E[1] - E[0] : 2.0 * (E.empty() ? 0.0 : E[0]);
  for (double e : E) s.edges_eV.push_back(e - 0.5 * w);
  if (!E.empty()) s.edges_eV.push_back(E.back() + 0.5 * w);
  return s;
}

void write_tally_csv(const fs::path& path, const std::vector<double>& R, const AbsorbedTally& t,
                     const RunMetadata& meta) {
  std::ofstream out = open_out(path);
  out << meta.header();
  out << "# absorbed probability per R cell (not a density)\n";
  out << "R,absorbed_G0,absorbed_G1,absorbed_G2\n";
  for (std::size_t j = 0; j < R.size(); ++j)
    out << csv_number(R[j]) << ',' << csv_number(t.by_region[0][j]) << ',' << csv_number(t.by_region[1][j]) << ','
        << csv_number(t.by_region[2][j]) << '\n';
}

AbsorbedTally read_tally_csv(const fs::path& path) {
  const auto t = read_timeseries(path);
  AbsorbedTally a;
  a.enabled = true;
  for (int k = 0; k < 3; ++k) a.by_region[k] = t.column(fmt::format("absorbed_G{}", k));
  return a;
}

void write_snapshot(const fs::path& stem, const DensitySnapshot& s, const std::vector<double>& z,
                    const RunMetadata& meta) {
  fs::path bin = stem;
  bin += ".f64";
  fs::path side = stem;
  side += ".txt";
  {
    std::ofstream out = open_out(bin);
    for (double v : s.log10_density(1e-12)) write_f64(out, v);
  }
  std::ofstream out = open_out(side);
  out << meta.header();
  out << fmt::format(
      "file: {}\n"
      "quantity: log10(max(|psi(R, z1, z2, t)|^2, 1e-12))\n"
      "dtype: float64 little-endian\n"
      "shape: {} x {} (z1 rows, z2 columns)\n"
      "t_au: {}\nt_fs: {}\nR_bohr: {}\nR_lo_bohr: {}\nR_hi_bohr: {}\n"
      "z_first_bohr: {}\nz_step_bohr: {}\n",
      bin.filename().string(), s.nz, s.nz, csv_number(s.t), csv_number(s.t * units::fs_per_au_time),
      csv_number(s.R), csv_number(s.R_lo), csv_number(s.R_hi), csv_number(z.front()), csv_number(z[1] - z[0]));
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const fs::path& dir, RunManifest m, const std::vector<std::string>& files,
                    const std::string& name) {
  m.files.clear();
  if (m.code_version.empty()) m.code_version = code_version();
  for (const auto& f : files) {
    const fs::path p = dir / f;
    if (!fs::exists(p)) throw IoError("manifest: output file " + p.string() + " is missing");
    m.files.push_back({f, sha256_file_hex(p), fs::file_size(p)});
  }
  nlohmann::ordered_json j;
  j["label"] = m.label;
  j["stage"] = m.stage;
  j["config_digest"] = m.config_digest;
  j["code_version"] = m.code_version;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["stage_digests"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.stage_digests) j["stage_digests"][k] = v;
  j["files"] = nlohmann::ordered_json::array();
  for (const auto& e : m.files) j["files"].push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
  j["complete"] = true;
  fs::path tmp = dir / name;
  tmp += ".partial";
  {
    std::ofstream out = open_out(tmp);
    out << j.dump(2) << '\n';
  }
  fs::rename(tmp, dir / name);
}

RunManifest read_manifest(const fs::path& dir, const std::string& name) {
  const fs::path p = dir / name;
  if (!fs::exists(p)) throw IncompleteRunError("run directory " + dir.string() + " has no " + name);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(slurp(p));
  } catch (const nlohmann::json::exception& e) {
    throw IncompleteRunError(p.string() + ": malformed manifest: " + e.what());
  }
  RunManifest m;
  try {
    m.complete = j.value("complete", false);
    m.label = j.at("label").get<std::string>();
    m.stage = j.value("stage", std::string());
    m.config_digest = j.at("config_digest").get<std::string>();
    m.code_version = j.at("code_version").get<std::string>();
    m.started = j.at("started").get<std::string>();
    m.finished = j.at("finished").get<std::string>();
    for (const auto& [k, v] : j.at("stage_digests").items()) m.stage_digests.emplace_back(k, v.get<std::string>());
    for (const auto& e : j.at("files"))
      m.files.push_back({e.at("path").get<std::string>(), e.at("sha256").get<std::string>(),
                         e.at("bytes").get<std::uintmax_t>()});
  } catch (const nlohmann::json::exception& e) {
    throw IncompleteRunError(p.string() + ": incomplete manifest: " + e.what());
  }
  if (!m.complete) throw IncompleteRunError(p.string() + ": manifest is not marked complete");
  for (const auto& e : m.files)
    if (!fs::exists(dir / e.path)) throw IncompleteRunError("manifest lists " + e.path + " but it is missing");
  return m;
}

}  // namespace h2dyn

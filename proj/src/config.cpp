#include "h2dyn/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "h2dyn/error.hpp"
#include "h2dyn/units.hpp"

namespace h2dyn {

namespace {

enum class Kind { integer, real, boolean, text, real_list, path };

struct KeySpec {
  std::string_view section;
  std::string_view key;
  Kind kind;
  std::string_view def;      // empty: unset unless given
  std::string_view group{};  // pulse alternatives
  double lo = -std::numeric_limits<double>::infinity();
  bool lo_exclusive = false;
};

constexpr double inf = std::numeric_limits<double>::infinity();

// clang-format off
const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> s = {
    {"run", "label", Kind::text, "run"},
    {"run", "threads", Kind::integer, "1", {}, 1, false},

    {"grid", "nR", Kind::integer, "128"},
    {"grid", "nz", Kind::integer, "128"},
    {"grid", "R_max", Kind::real, "8", {}, 0, true},
    {"grid", "z_max", Kind::real, "60", {}, 0, true},

    {"pulse", "wavelength_nm", Kind::real, "800", "frequency", 0, true},
    {"pulse", "omega_au", Kind::real, "", "frequency", 0, true},
    {"pulse", "intensity_Wcm2", Kind::real, "5e14", "amplitude", 0, false},
    {"pulse", "E0_au", Kind::real, "", "amplitude", 0, false},
    {"pulse", "cycles", Kind::real, "1", "duration", 0, true},
    {"pulse", "duration_fs", Kind::real, "", "duration", 0, true},
    {"pulse", "tau_au", Kind::real, "", "duration", 0, true},
    {"pulse", "cep_phase", Kind::real, "-1.5707963267948966"},
    {"pulse", "t_start_fs", Kind::real, "0"},

    {"propagation", "dt_as", Kind::real, "1", {}, 0, true},
    {"propagation", "post_pulse_fs", Kind::real, "2", {}, 0, false},
    {"propagation", "observe_every", Kind::integer, "10", {}, 1, false},
    {"propagation", "map_every", Kind::integer, "50", {}, 1, false},
    {"propagation", "checkpoint_every", Kind::integer, "0", {}, 0, false},
    {"propagation", "stability_limit", Kind::real, "1e-6", {}, 0, true},
    {"propagation", "mu_R", Kind::real, "918.0764", {}, 0, true},

    {"groundstate", "dt_schedule", Kind::real_list, "0.5, 0.1, 0.05", {}, 0, true},
    {"groundstate", "tolerance", Kind::real, "1e-10", {}, 0, true},
    {"groundstate", "check_interval", Kind::integer, "10", {}, 1, false},
    {"groundstate", "max_steps", Kind::integer, "50000", {}, 1, false},
    {"groundstate", "seed_R", Kind::real, "1.4", {}, 0, true},
    {"groundstate", "seed_z", Kind::real, "0.7", {}, 0, false},

    {"absorber", "enabled", Kind::boolean, "true"},
    {"absorber", "z_onset", Kind::real, "", {}, 0, true},
    {"absorber", "R_onset", Kind::real, "", {}, 0, true},
    {"absorber", "exponent", Kind::real, "0.125", {}, 0, true},
    {"absorber", "inner", Kind::boolean, "false"},
    {"absorber", "inner_start", Kind::real, "22", {}, 0, true},
    {"absorber", "inner_width", Kind::real, "4", {}, 0, true},

    {"regions", "z_A", Kind::real, "20", {}, 0, true},

    {"calibration", "knot_start", Kind::real, "0.5", {}, 0, true},
    {"calibration", "knot_stop", Kind::real, "9.5", {}, 0, true},
    {"calibration", "knot_step", Kind::real, "0.25", {}, 0, true},
    {"calibration", "tolerance", Kind::real, "1e-5", {}, 0, true},
    {"calibration", "beta_lo", Kind::real, "0.3", {}, 0, true},
    {"calibration", "beta_hi", Kind::real, "3", {}, 0, true},
    {"calibration", "alpha_lo", Kind::real, "0.3", {}, 0, true},
    {"calibration", "alpha_hi", Kind::real, "5", {}, 0, true},
    {"calibration", "nz", Kind::integer, "128"},
    {"calibration", "z_max", Kind::real, "60", {}, 0, true},
    {"calibration", "dt_schedule", Kind::real_list, "0.2, 0.05, 0.0125", {}, 0, true},

    {"paths", "output_dir", Kind::path, "run"},
    {"paths", "softening_table", Kind::path, ""},
    {"paths", "groundstate", Kind::path, ""},
    {"paths", "h2_reference", Kind::path, "@data/reference/h2_bo.dat"},
    {"paths", "h2plus_reference", Kind::path, "@data/reference/h2plus_bo.dat"},

    {"snapshots", "times_fs", Kind::real_list, ""},
    {"snapshots", "R_values", Kind::real_list, "", {}, 0, true},
    {"snapshots", "half_width", Kind::real, "0", {}, 0, false},

    {"analysis", "ker_bin_eV", Kind::real, "0.1", {}, 0, true},
    {"analysis", "alt_bin_eV", Kind::real, "0.05", {}, 0, true},
  };
  return s;
}
// clang-format on

struct Entry {
  std::string value;
  int line = -1;  // -1: default, 0: override
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string full_key(const KeySpec& k) { return fmt::format("{}.{}", k.section, k.key); }

const KeySpec* find_key(std::string_view section, std::string_view key) {
  for (const auto& k : schema())
    if (k.section == section && k.key == key) return &k;
  return nullptr;
}

bool known_section(std::string_view section) {
  return std::any_of(schema().begin(), schema().end(), [&](const KeySpec& k) { return k.section == section; });
}

[[noreturn]] void fail(const std::string& what, const std::string& key, int line) {
  const std::string where = line > 0 ? fmt::format("line {}: ", line) : std::string("override: ");
  throw ParseError(where + what, key, line);
}

double parse_real(const std::string& s, const std::string& key, int line) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (!s.empty() && *b == '+') ++b;
  const auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc() || r.ptr != e || !std::isfinite(v))
    fail(fmt::format("'{}' is not a number for {}", s, key), key, line);
  return v;
}

long long parse_int(const std::string& s, const std::string& key, int line) {
  long long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    fail(fmt::format("'{}' is not an integer for {}", s, key), key, line);
  return v;
}

bool parse_bool(const std::string& s, const std::string& key, int line) {
  std::string l(s);
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  if (l == "true" || l == "yes" || l == "on" || l == "1") return true;
  if (l == "false" || l == "no" || l == "off" || l == "0") return false;
  fail(fmt::format("'{}' is not a boolean for {}", s, key), key, line);
}

std::vector<double> parse_list(const std::string& s, const std::string& key, int line) {
  std::vector<double> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(trim(item), key, line));
  return out;
}

void check_range(const KeySpec& k, double v, const std::string& key, int line) {
  const bool bad = k.lo_exclusive ? !(v > k.lo) : !(v >= k.lo);
  if (bad)
    fail(fmt::format("{} = {} out of range (must be {} {})", key, v, k.lo_exclusive ? ">" : ">=", k.lo), key,
         line);
}

// Validates and returns the normalized text of one value.
std::string normalize(const KeySpec& k, const Entry& e) {
  const std::string key = full_key(k);
  switch (k.kind) {
    case Kind::integer: {
      const long long v = parse_int(e.value, key, e.line);
      check_range(k, static_cast<double>(v), key, e.line);
      return fmt::format("{}", v);
    }
    case Kind::real: {
      const double v = parse_real(e.value, key, e.line);
      check_range(k, v, key, e.line);
      return fmt::format("{}", v);
    }
    case Kind::boolean:
      return parse_bool(e.value, key, e.line) ? "true" : "false";
    case Kind::real_list: {
      std::string out;
      for (double v : parse_list(e.value, key, e.line)) {
        check_range(k, v, key, e.line);
        if (!out.empty()) out += ", ";
        out += fmt::format("{}", v);
      }
      return out;
    }
    case Kind::text:
    case Kind::path:
      return e.value;
  }
  return e.value;
}

class Values {
 public:
  Values(std::map<std::string, std::string> norm, std::map<std::string, int> lines)
      : norm_(std::move(norm)), lines_(std::move(lines)) {}

  bool has(const std::string& k) const { return norm_.count(k) != 0; }
  const std::string& text(const std::string& k) const { return norm_.at(k); }
  int line(const std::string& k) const { return lines_.count(k) ? lines_.at(k) : -1; }
  double real(const std::string& k) const { return parse_real(text(k), k, line(k)); }
  long long integer(const std::string& k) const { return parse_int(text(k), k, line(k)); }
  bool boolean(const std::string& k) const { return text(k) == "true"; }
  std::optional<double> opt(const std::string& k) const {
    if (!has(k)) return std::nullopt;
    return real(k);
  }
  std::vector<double> list(const std::string& k) const { return has(k) ? parse_list(text(k), k, line(k)) : std::vector<double>{}; }

 private:
  std::map<std::string, std::string> norm_;
  std::map<std::string, int> lines_;
};

std::filesystem::path resolve_path(const std::string& raw, const std::filesystem::path& base) {
  if (raw.rfind("@data/", 0) == 0) return std::filesystem::path(H2DYN_DATA_DIR) / raw.substr(6);
  std::filesystem::path p(raw);
  if (p.is_relative() && !base.empty()) return base / p;
  return p;
}

}  // namespace

double RunConfig::dt() const noexcept { return dt_as * units::au_time_per_as; }

std::size_t RunConfig::n_steps() const {
  const double t_total = pulse.t_end() + post_pulse_fs * units::au_time_per_fs;
  return static_cast<std::size_t>(std::ceil(t_total / dt() - 1e-9));
}

GridSpec RunConfig::grid() const { return make_grid(nR, nz, R_max, z_max); }

PropagationConfig RunConfig::propagation() const {
  PropagationConfig p;
  p.dt = dt();
  p.n_steps = n_steps();
  p.observe_every = observe_every;
  p.checkpoint_every = checkpoint_every;
  p.stability_limit = stability_limit;
  p.masses = masses;
  p.absorber = absorber;
  p.z_A = z_A;
  return p;
}

std::string RunConfig::canonical(std::initializer_list<std::string_view> sections) const {
  std::string out;
  for (const auto& [k, v] : normalized) {
    const std::string_view section(k.data(), k.find('.'));
    if (sections.size() != 0 && std::find(sections.begin(), sections.end(), section) == sections.end()) continue;
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

Digest RunConfig::digest() const {
  return sha256(canonical({"grid", "pulse", "propagation", "groundstate", "absorber", "regions", "calibration",
                           "snapshots", "analysis"}));
}

RunConfig parse_config(std::string_view text, const std::vector<std::string>& overrides,
                       const std::filesystem::path& base_dir) {
  std::map<std::string, Entry> given;

  std::istringstream in{std::string(text)};
  std::string raw;
  std::string section;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    for (std::size_t i = 0; i < line.size(); ++i)
      if ((line[i] == '#' || line[i] == ';') && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line.erase(i);
        break;
      }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header", line, lineno);
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!known_section(section)) fail(fmt::format("unknown section [{}]", section), section, lineno);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(fmt::format("expected key = value, got '{}'", line), line, lineno);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (section.empty()) fail(fmt::format("key '{}' outside any section", key), key, lineno);
    const KeySpec* spec = find_key(section, key);
    const std::string fk = section + "." + key;
    if (!spec) fail(fmt::format("unknown key '{}' in [{}]", key, section), fk, lineno);
    if (auto it = given.find(fk); it != given.end())
      fail(fmt::format("duplicate key '{}' (first set on line {})", fk, it->second.line), fk, lineno);
    given[fk] = Entry{value, lineno};
  }

  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    const std::string fk = trim(std::string_view(ov).substr(0, std::min(eq, ov.size())));
    if (eq == std::string::npos) fail(fmt::format("override '{}' is not section.key=value", ov), fk, 0);
    const auto dot = fk.find('.');
    if (dot == std::string::npos) fail(fmt::format("override key '{}' needs a section", fk), fk, 0);
    const KeySpec* spec = find_key(std::string_view(fk).substr(0, dot), std::string_view(fk).substr(dot + 1));
    if (!spec) fail(fmt::format("unknown key '{}'", fk), fk, 0);
    if (!spec->group.empty())
      for (const auto& k : schema())
        if (k.group == spec->group && &k != spec) given.erase(full_key(k));
    given[fk] = Entry{trim(std::string_view(ov).substr(eq + 1)), 0};
  }

  // Pulse alternatives: at most one explicit member per group; the group's
  // default applies only when none is given.
  auto group_given = [&](std::string_view group) {
    std::vector<std::pair<int, std::string>> hits;
    for (const auto& k : schema())
      if (k.group == group && given.count(full_key(k))) hits.emplace_back(given[full_key(k)].line, full_key(k));
    std::sort(hits.begin(), hits.end());
    return hits;
  };
  for (std::string_view group : {"frequency", "amplitude", "duration"}) {
    const auto hits = group_given(group);
    if (hits.size() > 1)
      fail(fmt::format("{} conflicts with {}; give only one", hits[1].second, hits[0].second), hits[1].second,
           hits[1].first);
  }

  std::map<std::string, std::string> norm;
  std::map<std::string, int> lines;
  for (const auto& k : schema()) {
    const std::string fk = full_key(k);
    Entry e;
    if (auto it = given.find(fk); it != given.end()) {
      e = it->second;
    } else {
      if (k.def.empty()) continue;
      if (!k.group.empty() && !group_given(k.group).empty()) continue;
      e = Entry{std::string(k.def), -1};
    }
    norm[fk] = normalize(k, e);
    lines[fk] = e.line;
  }
  const Values v(norm, lines);

  RunConfig c;
  c.normalized = norm;
  c.label = v.text("run.label");
  c.threads = static_cast<int>(v.integer("run.threads"));

  c.nR = static_cast<int>(v.integer("grid.nR"));
  c.nz = static_cast<int>(v.integer("grid.nz"));
  c.R_max = v.real("grid.R_max");
  c.z_max = v.real("grid.z_max");
  for (const char* k : {"grid.nR", "grid.nz"})
    if (!is_power_of_two(v.integer(k)) || v.integer(k) < 8)
      fail(fmt::format("{} must be a power of two >= 8", k), k, v.line(k));

  PulseInput& p = c.pulse_input;
  p.wavelength_nm = v.opt("pulse.wavelength_nm");
  p.omega = v.opt("pulse.omega_au");
  p.intensity_Wcm2 = v.opt("pulse.intensity_Wcm2");
  p.E0 = v.opt("pulse.E0_au");
  p.cycles = v.opt("pulse.cycles");
  p.duration_fs = v.opt("pulse.duration_fs");
  p.tau = v.opt("pulse.tau_au");
  p.phi = v.real("pulse.cep_phase");
  p.t_start = v.real("pulse.t_start_fs") * units::au_time_per_fs;
  try {
    c.pulse = p.resolve();
  } catch (const ConfigError& e) {
    fail(e.what(), "pulse", 0);
  }

  c.dt_as = v.real("propagation.dt_as");
  c.post_pulse_fs = v.real("propagation.post_pulse_fs");
  c.observe_every = static_cast<std::size_t>(v.integer("propagation.observe_every"));
  c.map_every = static_cast<std::size_t>(v.integer("propagation.map_every"));
  c.checkpoint_every = static_cast<std::size_t>(v.integer("propagation.checkpoint_every"));
  c.stability_limit = v.real("propagation.stability_limit");
  c.masses.mu_R = v.real("propagation.mu_R");

  c.groundstate.dt_schedule = v.list("groundstate.dt_schedule");
  if (c.groundstate.dt_schedule.empty())
    fail("groundstate.dt_schedule is empty", "groundstate.dt_schedule", v.line("groundstate.dt_schedule"));
  c.groundstate.tolerance = v.real("groundstate.tolerance");
  c.groundstate.check_interval = static_cast<int>(v.integer("groundstate.check_interval"));
  c.groundstate.max_steps = static_cast<std::size_t>(v.integer("groundstate.max_steps"));
  c.seed_R = v.real("groundstate.seed_R");
  c.seed_z = v.real("groundstate.seed_z");

  c.absorber.enabled = v.boolean("absorber.enabled");
  c.absorber.z_onset = v.opt("absorber.z_onset");
  c.absorber.R_onset = v.opt("absorber.R_onset");
  c.absorber.exponent = v.real("absorber.exponent");
  c.absorber.inner = v.boolean("absorber.inner");
  c.absorber.inner_start = v.real("absorber.inner_start");
  c.absorber.inner_width = v.real("absorber.inner_width");
  if (c.absorber.z_onset && !(*c.absorber.z_onset < c.z_max))
    fail("absorber.z_onset must be below grid.z_max", "absorber.z_onset", v.line("absorber.z_onset"));
  if (c.absorber.R_onset && !(*c.absorber.R_onset < c.R_max))
    fail("absorber.R_onset must be below grid.R_max", "absorber.R_onset", v.line("absorber.R_onset"));

  c.z_A = v.real("regions.z_A");
  const double z_on = c.absorber.z_onset.value_or(0.8 * c.z_max);
  if (!(c.z_A < c.z_max)) fail("regions.z_A must be below grid.z_max", "regions.z_A", v.line("regions.z_A"));
  if (c.absorber.enabled && !(c.z_A < z_on))
    fail("regions.z_A must be below the absorber onset", "regions.z_A", v.line("regions.z_A"));

  auto& cal = c.calibration;
  const double k0 = v.real("calibration.knot_start"), k1 = v.real("calibration.knot_stop");
  const double ks = v.real("calibration.knot_step");
  if (k1 < k0) fail("calibration.knot_stop below knot_start", "calibration.knot_stop", v.line("calibration.knot_stop"));
  const auto nk = static_cast<int>(std::floor((k1 - k0) / ks + 1e-9));
  cal.knots.clear();
  for (int i = 0; i <= nk; ++i) cal.knots.push_back(k0 + i * ks);
  cal.tol = v.real("calibration.tolerance");
  cal.beta_lo = v.real("calibration.beta_lo");
  cal.beta_hi = v.real("calibration.beta_hi");
  cal.alpha_lo = v.real("calibration.alpha_lo");
  cal.alpha_hi = v.real("calibration.alpha_hi");
  if (!(cal.beta_lo < cal.beta_hi)) fail("calibration beta bracket is empty", "calibration.beta_hi", v.line("calibration.beta_hi"));
  if (!(cal.alpha_lo < cal.alpha_hi)) fail("calibration alpha bracket is empty", "calibration.alpha_hi", v.line("calibration.alpha_hi"));
  cal.solver.nz = static_cast<int>(v.integer("calibration.nz"));
  if (!is_power_of_two(cal.solver.nz) || cal.solver.nz < 8)
    fail("calibration.nz must be a power of two >= 8", "calibration.nz", v.line("calibration.nz"));
  cal.solver.z_max = v.real("calibration.z_max");
  cal.solver.itime.dt_schedule = v.list("calibration.dt_schedule");
  if (cal.solver.itime.dt_schedule.empty())
    fail("calibration.dt_schedule is empty", "calibration.dt_schedule", v.line("calibration.dt_schedule"));
  cal.threads = c.threads;

  c.paths.output_dir = resolve_path(v.text("paths.output_dir"), base_dir);
  c.paths.softening_table = v.has("paths.softening_table")
                                ? resolve_path(v.text("paths.softening_table"), base_dir)
                                : c.paths.output_dir / "softening_table.dat";
  c.paths.groundstate = v.has("paths.groundstate") ? resolve_path(v.text("paths.groundstate"), base_dir)
                                                   : c.paths.output_dir / "groundstate.wpkt";
  c.paths.h2_reference = resolve_path(v.text("paths.h2_reference"), base_dir);
  c.paths.h2plus_reference = resolve_path(v.text("paths.h2plus_reference"), base_dir);

  const auto times = v.list("snapshots.times_fs");
  const auto Rs = v.list("snapshots.R_values");
  if (times.size() != Rs.size())
    fail("snapshots.times_fs and snapshots.R_values differ in length", "snapshots.R_values",
         v.line("snapshots.R_values"));
  const double hw = v.real("snapshots.half_width");
  for (std::size_t i = 0; i < times.size(); ++i) c.snapshots.push_back({times[i], Rs[i], hw});

  c.ker_bin_eV = v.real("analysis.ker_bin_eV");
  c.alt_bin_eV = v.real("analysis.alt_bin_eV");
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read configuration " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides, path.parent_path());
}

std::string default_config_text() {
  std::string out;
  std::string_view section;
  for (const auto& k : schema()) {
    if (k.section != section) {
      if (!section.empty()) out += '\n';
      section = k.section;
      out += fmt::format("[{}]\n", section);
    }
    if (k.def.empty())
      out += fmt::format("# {} =\n", k.key);
    else
      out += fmt::format("{} = {}\n", k.key, k.def);
  }
  return out;
}

}  // namespace h2dyn

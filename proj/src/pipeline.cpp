#include "h2dyn/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "h2dyn/checkpoint.hpp"
#include "h2dyn/error.hpp"
#include "h2dyn/output.hpp"
#include "h2dyn/units.hpp"

namespace h2dyn {

namespace fs = std::filesystem;

namespace {

void say(const StageOptions& o, const std::string& msg) {
  if (o.log) o.log(msg);
}

std::string hex(const std::string& text) { return to_hex(sha256(text)); }

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create directory " + p.string() + ": " + ec.message());
}

RunMetadata metadata(const RunConfig& c, const std::string& table_digest = {}) {
  RunMetadata m;
  m.label = c.label;
  m.config_digest = c.digest();
  m.table_digest = table_digest;
  return m;
}

bool stage_current(const fs::path& dir, const std::string& name, const std::string& digest) {
  try {
    const RunManifest m = read_manifest(dir, name);
    for (const auto& [k, v] : m.stage_digests)
      if (k == "stage" && v == digest) return true;
  } catch (const IncompleteRunError&) {
  }
  return false;
}

void record_stage(const RunConfig& c, const std::string& stage, const std::string& digest,
                  const std::string& started, const std::vector<std::string>& files, const std::string& name) {
  RunManifest m;
  m.label = c.label;
  m.stage = stage;
  m.config_digest = to_hex(c.digest());
  m.code_version = code_version();
  m.started = started;
  m.finished = utc_timestamp();
  m.stage_digests = {{"stage", digest}};
  write_manifest(c.paths.output_dir, m, files, name);
}

std::string file_name_in(const fs::path& p, const fs::path& dir) {
  std::error_code ec;
  const fs::path rel = fs::relative(p, dir, ec);
  if (ec || rel.empty() || *rel.begin() == "..") return {};
  return rel.string();
}

std::string table_hex(const SofteningTable& t) { return to_hex(softening_digest(t)); }

}  // namespace

std::string calibrate_digest(const RunConfig& c) {
  return hex(c.canonical({"calibration"}) + sha256_file_hex(c.paths.h2_reference) + "\n" +
             sha256_file_hex(c.paths.h2plus_reference));
}

std::string groundstate_digest(const RunConfig& c) {
  std::string mu = c.normalized.count("propagation.mu_R") ? c.normalized.at("propagation.mu_R") : "";
  return hex(calibrate_digest(c) + "\n" + c.canonical({"grid", "groundstate"}) + "mu_R=" + mu + "\n");
}

std::string propagate_digest(const RunConfig& c) { return hex(groundstate_digest(c) + "\n" + to_hex(c.digest())); }

std::string resolved_config_text(const RunConfig& c) {
  std::string out, section;
  for (const auto& [k, v] : c.normalized) {
    const auto dot = k.find('.');
    const std::string s = k.substr(0, dot);
    if (s != section) {
      if (!section.empty()) out += '\n';
      section = s;
      out += fmt::format("[{}]\n", s);
    }
    out += fmt::format("{} = {}\n", k.substr(dot + 1), v);
  }
  return out;
}

CalibrationResult run_calibrate(const RunConfig& c, const StageOptions& o) {
  const std::string started = utc_timestamp();
  const ReferenceCurve h2 = read_reference_curve(c.paths.h2_reference, CurveLabel::H2);
  const ReferenceCurve h2p = read_reference_curve(c.paths.h2plus_reference, CurveLabel::H2plus);
  ensure_dir(c.paths.output_dir);
  say(o, fmt::format("calibrating {} knots ({} thread(s))", c.calibration.knots.size(), c.calibration.threads));
  const auto t0 = std::chrono::steady_clock::now();
  CalibrationResult r = calibrate(h2, h2p, c.calibration);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  ensure_dir(c.paths.softening_table.parent_path().empty() ? fs::path(".") : c.paths.softening_table.parent_path());
  write_softening_table(c.paths.softening_table, r.table);

  const fs::path report = c.paths.output_dir / "calibration_report.csv";
  std::ofstream out(report);
  if (!out) throw IoError("cannot write " + report.string());
  RunMetadata meta = metadata(c, table_hex(r.table));
  meta.extra = {{"max_h2_residual_hartree", csv_number(r.max_h2_residual())},
                {"max_h2plus_residual_hartree", csv_number(r.max_h2plus_residual())},
                {"alpha_at_1.4", csv_number(r.table.alpha(1.4))},
                {"beta_at_1.4", csv_number(r.table.beta(1.4))},
                {"wall_seconds", fmt::format("{:.1f}", secs)}};
  out << meta.header();
  out << "R,alpha,beta,h2_model,h2_ref,h2_residual,h2plus_model,h2plus_ref,h2plus_residual\n";
  for (const auto& k : r.knots)
    out << fmt::format("{},{},{},{},{},{},{},{},{}\n", csv_number(k.R), csv_number(k.alpha), csv_number(k.beta),
                       csv_number(k.h2_model), csv_number(k.h2_ref), csv_number(k.h2_residual()),
                       csv_number(k.h2plus_model), csv_number(k.h2plus_ref), csv_number(k.h2plus_residual()));
  out.close();

  say(o, fmt::format("max |residual| H2 {:.2e}, H2+ {:.2e} hartree; alpha(1.4) = {:.6f}, beta(1.4) = {:.6f} ({:.0f} s)",
                     r.max_h2_residual(), r.max_h2plus_residual(), r.table.alpha(1.4), r.table.beta(1.4), secs));
  std::vector<std::string> files{"calibration_report.csv"};
  if (auto n = file_name_in(c.paths.softening_table, c.paths.output_dir); !n.empty()) files.push_back(n);
  record_stage(c, "calibrate", calibrate_digest(c), started, files, "stage_calibrate.json");
  return r;
}

GroundStateSummary run_groundstate(const RunConfig& c, const StageOptions& o) {
  const std::string started = utc_timestamp();
  const SofteningTable table = read_softening_table(c.paths.softening_table);
  ensure_dir(c.paths.output_dir);
  auto spec = std::make_shared<const GridSpec>(c.grid());
  const PotentialGrid v = eval_potential_grid(spec, table);
  say(o, fmt::format("relaxing on {}x{}x{} grid", c.nR, c.nz, c.nz));
  GroundState gs = relax_imaginary(default_seed(spec, c.seed_R, c.seed_z), v, c.masses, c.groundstate);

  GroundStateSummary s;
  s.energy = gs.relaxation.energy;
  s.mean_R = expectation(gs.wf, Observable::R);
  s.steps = gs.relaxation.steps;

  CheckpointHeader h;
  h.table_digest = softening_digest(table);
  h.config_digest = sha256(groundstate_digest(c));
  ensure_dir(c.paths.groundstate.parent_path().empty() ? fs::path(".") : c.paths.groundstate.parent_path());
  write_checkpoint(c.paths.groundstate, h, gs.wf);

  RunMetadata meta = metadata(c, table_hex(table));
  {
    std::ofstream out(c.paths.output_dir / "groundstate_report.txt");
    out << meta.header();
    out << fmt::format("energy_hartree: {}\nmean_R_bohr: {}\nsteps: {}\nresidual: {}\ncheckpoint: {}\n",
                       csv_number(s.energy), csv_number(s.mean_R), s.steps, csv_number(gs.relaxation.residual),
                       c.paths.groundstate.string());
  }
  {
    std::ofstream out(c.paths.output_dir / "groundstate_history.csv");
    out << meta.header() << "check,stage,dt,energy_estimate_hartree\n";
    const auto& r = gs.relaxation;
    for (std::size_t i = 0; i < r.history.size(); ++i)
      out << i << ',' << r.history_stage[i] << ',' << csv_number(c.groundstate.dt_schedule[r.history_stage[i]]) << ','
          << csv_number(r.history[i]) << '\n';
  }
  say(o, fmt::format("ground state E = {:.10f} hartree, <R> = {:.4f} bohr after {} steps", s.energy, s.mean_R, s.steps));
  std::vector<std::string> files{"groundstate_report.txt", "groundstate_history.csv"};
  if (auto n = file_name_in(c.paths.groundstate, c.paths.output_dir); !n.empty()) files.push_back(n);
  record_stage(c, "groundstate", groundstate_digest(c), started, files, "stage_groundstate.json");
  return s;
}

PropagateSummary run_propagate(const RunConfig& c, const StageOptions& o) {
  const std::string started = utc_timestamp();
  const fs::path dir = c.paths.output_dir;
  ensure_dir(dir);

  const SofteningTable table = read_softening_table(c.paths.softening_table);
  const Digest tdig = softening_digest(table);
  const Digest cdig = c.digest();
  const fs::path ckpt_path = dir / "checkpoint.wpkt";

  std::optional<ResumePoint> resume;
  std::optional<double> resume_t;
  std::optional<WaveFunction> wf;
  if (o.resume) {
    Checkpoint ck = read_checkpoint(ckpt_path);
    if (!o.allow_digest_mismatch) require_matching(ck.header, cdig, tdig);
    resume = ResumePoint{ck.header.step, std::move(ck.tally)};
    resume_t = ck.header.time;
    wf.emplace(std::move(ck.wf));
    say(o, fmt::format("resuming at step {} (t = {:.4f} fs)", ck.header.step, ck.header.time * units::fs_per_au_time));
  } else {
    Checkpoint gs = read_checkpoint(c.paths.groundstate);
    if (!o.allow_digest_mismatch && gs.header.table_digest != tdig)
      throw DigestMismatch("ground state " + c.paths.groundstate.string() +
                           " was relaxed with a different softening table");
    wf.emplace(std::move(gs.wf));
  }
  const GridSpec want = c.grid();
  if (wf->spec().nR != want.nR || wf->spec().nz != want.nz || wf->spec().R_max != want.R_max ||
      wf->spec().z_max != want.z_max)
    throw ConfigError("starting state grid differs from the configured grid");

  // Only now is the run going to be rewritten; a refused start leaves it valid.
  std::error_code ec;
  fs::remove(dir / "manifest.json", ec);

  const PotentialGrid v = eval_potential_grid(wf->spec_ptr(), table);
  const PropagationConfig pc = c.propagation();
  const RegionPartition part = classify_regions(wf->spec(), c.z_A);

  RunMetadata meta = metadata(c, to_hex(tdig));
  const PulseParams& pulse = c.pulse;
  const FieldExtremum peak = peak_field(pulse);
  meta.extra = {{"dt_au", csv_number(pc.dt)},
                {"n_steps", std::to_string(pc.n_steps)},
                {"pulse_omega_au", csv_number(pulse.omega)},
                {"pulse_E0_au", csv_number(pulse.E0)},
                {"pulse_tau_au", csv_number(pulse.tau)},
                {"pulse_cep_rad", csv_number(pulse.phi)},
                {"pulse_end_au", csv_number(pulse.t_end())},
                {"z_A_bohr", csv_number(c.z_A)},
                {"absorber", c.absorber.enabled ? "on" : "off"}};

  TimeSeriesWriter ts(dir / "timeseries.csv", meta, resume_t);
  NuclearMapWriter maps(dir, wf->spec().R_points, meta, resume_t);
  std::vector<std::string> snapshot_files;
  std::size_t next_snap = 0;
  for (std::size_t i = 0; i < c.snapshots.size(); ++i) {
    const std::string stem = fmt::format("snapshot_{}", i);
    snapshot_files.push_back(stem + ".f64");
    snapshot_files.push_back(stem + ".txt");
  }
  if (resume_t)
    while (next_snap < c.snapshots.size() &&
           c.snapshots[next_snap].t_fs * units::au_time_per_fs - 0.5 * pc.dt <= *resume_t)
      ++next_snap;

  const std::size_t progress_every = std::max<std::size_t>(pc.n_steps / 20, 1);
  PropagationHooks hooks;
  hooks.observe = [&](const StepView& s) {
    TimeSeriesRow row;
    row.t_au = s.t;
    row.field_au = s.field;
    row.P = probabilities(s.wf, part);
    row.norm = row.P[0] + row.P[1] + row.P[2];
    for (int k = 0; k < 3; ++k) row.absorbed[k] = s.tally.enabled ? s.tally.region_total(k) : 0.0;
    row.dipole = expectation(s.wf, Observable::z1_plus_z2);
    ts.write(row);
    if (s.step % c.map_every == 0 || s.step == pc.n_steps)
      maps.write(s.t, {nuclear_distribution(s.wf, part, 0, s.t), nuclear_distribution(s.wf, part, 1, s.t),
                       nuclear_distribution(s.wf, part, 2, s.t)});
    while (next_snap < c.snapshots.size() &&
           s.t >= c.snapshots[next_snap].t_fs * units::au_time_per_fs - 0.5 * pc.dt) {
      const auto& rq = c.snapshots[next_snap];
      const DensitySnapshot snap = rq.half_width > 0.0
                                       ? snapshot_density_slab(s.wf, rq.R - rq.half_width, rq.R + rq.half_width, s.t)
                                       : snapshot_density(s.wf, rq.R, s.t);
      write_snapshot(dir / fmt::format("snapshot_{}", next_snap), snap, s.wf.spec().z_points, meta);
      ++next_snap;
    }
    if (s.step % progress_every < c.observe_every || s.step == pc.n_steps)
      say(o, fmt::format("step {:>7}/{} t = {:7.4f} fs  E = {:+.5f}  P1 = {:.3e}  P2 = {:.3e}  absorbed = {:.3e}", s.step,
                         pc.n_steps, s.t * units::fs_per_au_time, s.field, row.P[1], row.P[2],
                         row.absorbed[0] + row.absorbed[1] + row.absorbed[2]));
  };
  hooks.checkpoint = [&](const StepView& s) {
    CheckpointHeader h;
    h.dt = pc.dt;
    h.step = s.step;
    h.time = s.t;
    h.pulse = pulse;
    h.table_digest = tdig;
    h.config_digest = cdig;
    ts.flush();
    write_checkpoint(ckpt_path, h, s.wf, &s.tally);
  };

  const PropagationResult res = propagate(*wf, v, pulse, pc, hooks, resume);
  ts.flush();
  maps.finish();

  const NuclearDistribution P2 = nuclear_distribution(*wf, part, 2, res.t_end);
  const KerBinning bins{c.ker_bin_eV, 0.0};
  const KERSpectrum ker = res.tally.enabled ? accumulate_ker(res.tally, P2, bins) : ker_map(P2, bins);
  write_ker_csv(dir / "ker.csv", ker, meta);
  write_tally_csv(dir / "tally.csv", wf->spec().R_points,
                  res.tally.enabled ? res.tally : AbsorbedTally::zeros(wf->spec().nR, false), meta);
  {
    CheckpointHeader h;
    h.dt = pc.dt;
    h.step = res.steps;
    h.time = res.t_end;
    h.pulse = pulse;
    h.table_digest = tdig;
    h.config_digest = cdig;
    write_checkpoint(dir / "final.wpkt", h, *wf, &res.tally);
  }
  {
    std::ofstream out(dir / "config.resolved.ini");
    out << meta.header() << resolved_config_text(c);
  }

  PropagateSummary sum;
  sum.steps = res.steps;
  sum.P = probabilities(*wf, part);
  sum.norm = norm2(*wf);
  for (int k = 0; k < 3; ++k) sum.absorbed[k] = res.tally.enabled ? res.tally.region_total(k) : 0.0;
  {
    std::ofstream out(dir / "propagate_report.txt");
    out << meta.header();
    out << fmt::format(
        "E_max_au: {}\nE_max_time_au: {}\nU_p_hartree: {}\nfinal_P0: {}\nfinal_P1: {}\nfinal_P2: {}\nfinal_norm: {}\n"
        "absorbed_G0: {}\nabsorbed_G1: {}\nabsorbed_G2: {}\nker_integral: {}\n",
        csv_number(std::abs(peak.value)), csv_number(peak.t), csv_number(ponderomotive(std::abs(peak.value), pulse.omega)),
        csv_number(sum.P[0]), csv_number(sum.P[1]), csv_number(sum.P[2]), csv_number(sum.norm),
        csv_number(sum.absorbed[0]), csv_number(sum.absorbed[1]), csv_number(sum.absorbed[2]),
        csv_number(ker.integral()));
  }

  std::vector<std::string> files{"timeseries.csv", "P_map_times.csv", "ker.csv", "tally.csv", "final.wpkt",
                                 "config.resolved.ini", "propagate_report.txt"};
  for (int k = 0; k < 3; ++k) {
    files.push_back(fmt::format("P{}_map.f64", k));
    files.push_back(fmt::format("P{}_map.txt", k));
  }
  for (const auto& f : snapshot_files)
    if (fs::exists(dir / f)) files.push_back(f);
  RunManifest m;
  m.label = c.label;
  m.stage = "propagate";
  m.config_digest = to_hex(cdig);
  m.code_version = code_version();
  m.started = started;
  m.finished = utc_timestamp();
  m.stage_digests = {{"stage", propagate_digest(c)}, {"table", to_hex(tdig)}};
  write_manifest(dir, m, files);
  return sum;
}

void run_analyze(const fs::path& dir, const StageOptions& o) {
  const RunManifest man = read_manifest(dir);
  const RunConfig c = load_config(dir / "config.resolved.ini");
  const fs::path out_dir = dir / "analysis";
  ensure_dir(out_dir);

  const TimeSeriesTable ts = read_timeseries(dir / "timeseries.csv");
  const auto t_ts = ts.column("t_au");
  const auto abs_ts = ts.column("absorbed_cum");
  std::array<NuclearMap, 3> maps{read_nuclear_map(dir, 0), read_nuclear_map(dir, 1), read_nuclear_map(dir, 2)};
  const double dR = maps[0].R.size() > 1 ? maps[0].R[1] - maps[0].R[0] : 0.0;

  // Conservation on the stored maps.
  double worst = 0.0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < maps[0].t.size(); ++i) {
    while (j < t_ts.size() && t_ts[j] < maps[0].t[i] - 1e-9) ++j;
    if (j == t_ts.size()) break;
    double total = abs_ts[j];
    for (const auto& m : maps)
      for (double x : m.rows[i]) total += x * dR;
    worst = std::max(worst, std::abs(total - 1.0));
  }

  const AbsorbedTally tally = read_tally_csv(dir / "tally.csv");
  NuclearDistribution P2;
  P2.region = 2;
  P2.dR = dR;
  P2.R = maps[2].R;
  P2.values = maps[2].rows.back();
  P2.t = maps[2].t.back();
  const bool has_flux = tally.total() > 0.0 || c.absorber.enabled;
  AbsorbedTally tl = tally;
  tl.enabled = true;
  const KERSpectrum main = has_flux ? accumulate_ker(tl, P2, {c.ker_bin_eV, 0.0}) : ker_map(P2, {c.ker_bin_eV, 0.0});
  const KERSpectrum alt = has_flux ? accumulate_ker(tl, P2, {c.alt_bin_eV, 0.0}) : ker_map(P2, {c.alt_bin_eV, 0.0});
  RunMetadata meta;
  meta.label = c.label;
  meta.config_digest = c.digest();
  write_ker_csv(out_dir / "ker_alt.csv", alt, meta);

  const SpectrumPeak pm = find_peak(main), pa = find_peak(alt);
  const FieldExtremum peak = peak_field(c.pulse);
  const double Emax = std::abs(peak.value);
  const double p2_total = P2.integral() + tally.region_total(2);
  {
    std::ofstream out(out_dir / "peaks.csv");
    out << meta.header() << "bin_width_eV,center_eV,height_per_eV,fwhm_eV\n";
    out << fmt::format("{},{},{},{}\n", csv_number(c.ker_bin_eV), csv_number(pm.center_eV), csv_number(pm.height),
                       csv_number(pm.fwhm_eV));
    out << fmt::format("{},{},{},{}\n", csv_number(c.alt_bin_eV), csv_number(pa.center_eV), csv_number(pa.height),
                       csv_number(pa.fwhm_eV));
  }
  {
    std::ofstream out(out_dir / "summary.txt");
    out << meta.header();
    out << fmt::format(
        "run_finished: {}\nE_max_au: {}\nU_p_hartree: {}\nker_peak_eV: {}\nker_peak_fwhm_eV: {}\nker_peak_alt_eV: {}\n"
        "ker_integral: {}\nP2_plus_absorbed_G2: {}\nker_conservation_error: {}\nmap_conservation_max_error: {}\n",
        man.finished, csv_number(Emax), csv_number(ponderomotive(Emax, c.pulse.omega)), csv_number(pm.center_eV),
        csv_number(pm.fwhm_eV), csv_number(pa.center_eV), csv_number(main.integral()), csv_number(p2_total),
        csv_number(std::abs(main.integral() - p2_total)), csv_number(worst));
  }
  say(o, fmt::format("KER peak {:.2f} eV (FWHM {:.2f} eV); E_max = {:.4f} au, U_p = {:.3f} hartree; "
                     "max conservation error on maps {:.1e}",
                     pm.center_eV, pm.fwhm_eV, Emax, ponderomotive(Emax, c.pulse.omega), worst));
}

void run_pipeline(const RunConfig& c, const StageOptions& o) {
  const fs::path dir = c.paths.output_dir;
  if (stage_current(dir, "stage_calibrate.json", calibrate_digest(c)) && fs::exists(c.paths.softening_table))
    say(o, "calibrate: up to date");
  else
    run_calibrate(c, o);
  if (stage_current(dir, "stage_groundstate.json", groundstate_digest(c)) && fs::exists(c.paths.groundstate))
    say(o, "groundstate: up to date");
  else
    run_groundstate(c, o);
  if (stage_current(dir, "manifest.json", propagate_digest(c)))
    say(o, "propagate: up to date");
  else
    run_propagate(c, o);
  run_analyze(dir, o);
}

}  // namespace h2dyn

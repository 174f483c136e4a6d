#include "h2dyn/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "h2dyn/error.hpp"

namespace h2dyn {

void Masses::validate() const {
  if (!(mu_R > 0.0) || !(m_e > 0.0)) throw ConfigError("masses must be positive");
}

namespace {

double ramp(double x, double onset, double edge, double p) {
  if (x <= onset) return 1.0;
  if (x >= edge) return 0.0;
  const double c = std::cos(0.5 * units::pi * (x - onset) / (edge - onset));
  return std::pow(std::max(c, 0.0), p);
}

double band(double x, double start, double width, double p) {
  if (x <= start || x >= start + width) return 1.0;
  const double xi = (x - start) / width;
  const double d = 1.0 - std::abs(2.0 * xi - 1.0);
  return std::pow(std::max(std::cos(0.5 * units::pi * d), 0.0), p);
}

void require_coordinate(const WaveFunction& wf, const char* what) {
  if (!wf.in_coordinate_space()) throw UsageError(std::string(what) + " requires coordinate representation");
}

}  // namespace

AbsorberMask::AbsorberMask(const GridSpec& g, const AbsorberSpec& a) : enabled_(a.enabled) {
  mR_.assign(g.nR, 1.0);
  mz_.assign(g.nz, 1.0);
  if (!enabled_) return;
  const double z_on = a.z_onset.value_or(0.8 * g.z_max);
  const double R_on = a.R_onset.value_or(0.9 * g.R_max);
  if (!(z_on > 0.0 && z_on < g.z_max)) throw ConfigError("absorber z onset must lie inside (0, z_max)");
  if (!(R_on > 0.0 && R_on < g.R_max)) throw ConfigError("absorber R onset must lie inside (0, R_max)");
  if (!(a.exponent > 0.0)) throw ConfigError("absorber exponent must be positive");
  for (int j = 0; j < g.nR; ++j) mR_[j] = ramp(g.R_points[j], R_on, g.R_max, a.exponent);
  for (int i = 0; i < g.nz; ++i) {
    const double az = std::abs(g.z_points[i]);
    mz_[i] = ramp(az, z_on, g.z_max, a.exponent);
    if (a.inner) mz_[i] *= band(az, a.inner_start, a.inner_width, a.exponent);
  }
  if (a.inner && !(a.inner_width > 0.0 && a.inner_start + a.inner_width < z_on))
    throw ConfigError("inner absorber band must end before the outer onset");
  for (int i1 = 0; i1 < g.nz; ++i1)
    for (int i2 = 0; i2 < g.nz; ++i2)
      if (mz_[i1] * mz_[i2] < 1.0) frame_.push_back(static_cast<std::size_t>(i1) * g.nz + i2);
}

void AbsorberMask::apply(WaveFunction& wf, const RegionPartition& part, AbsorbedTally& tally) const {
  if (!enabled_) return;
  require_coordinate(wf, "absorber");
  const auto& g = wf.spec();
  const std::size_t plane = g.slab_size();
  const double dV = g.volume_element();
  for (int iR = 0; iR < g.nR; ++iR) {
    cplx* q = wf.data() + iR * plane;
    std::array<double, 3> lost{0.0, 0.0, 0.0};
    auto visit = [&](std::size_t i) {
      const double m = mR_[iR] * mz_[i / g.nz] * mz_[i % g.nz];
      lost[part.label[i]] += (1.0 - m * m) * std::norm(q[i]);
      q[i] *= m;
    };
    if (mR_[iR] < 1.0) {
      for (std::size_t i = 0; i < plane; ++i) visit(i);
    } else {
      for (std::size_t i : frame_) visit(i);
    }
    if (tally.enabled)
      for (int k = 0; k < 3; ++k) tally.by_region[k][iR] += lost[k] * dV;
  }
}

AbsorbedTally apply_absorber(WaveFunction& wf, const AbsorberSpec& spec, const RegionPartition& part) {
  AbsorbedTally t = AbsorbedTally::zeros(wf.spec().nR, true);
  AbsorberMask(wf.spec(), spec).apply(wf, part, t);
  return t;
}

SplitStepper::SplitStepper(const PotentialGrid& potential, double dt, const Masses& masses)
    : spec_(potential.spec), dt_(dt) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  masses.validate();
  const auto& g = *spec_;
  half_.resize(g.size());
  for (std::size_t i = 0; i < half_.size(); ++i) half_[i] = std::polar(1.0, -0.5 * potential.values[i] * dt);
  const double inv_n = 1.0 / static_cast<double>(g.size());
  kR_.resize(g.nR);
  for (int j = 0; j < g.nR; ++j) {
    const double k = g.kR_points[j];
    kR_[j] = std::polar(inv_n, -0.5 * k * k / masses.mu_R * dt);
  }
  kz_.resize(g.nz);
  for (int i = 0; i < g.nz; ++i) {
    const double k = g.kz_points[i];
    kz_[i] = std::polar(1.0, -0.5 * k * k / masses.m_e * dt);
  }
  kplane_.resize(g.slab_size());
  cplane_.resize(g.slab_size());
  for (int i1 = 0; i1 < g.nz; ++i1)
    for (int i2 = 0; i2 < g.nz; ++i2) kplane_[i1 * g.nz + i2] = kz_[i1] * kz_[i2];
}

void SplitStepper::apply_phase(WaveFunction& wf, bool doubled, double e_first, double e_second) {
  const auto& g = *spec_;
  const double e = e_first + e_second;
  if (e == 0.0) {
    std::fill(cplane_.begin(), cplane_.end(), cplx(1.0, 0.0));
  } else {
    std::vector<cplx> line(g.nz);
    for (int i = 0; i < g.nz; ++i) line[i] = std::polar(1.0, -0.5 * g.z_points[i] * e * dt_);
    for (int i1 = 0; i1 < g.nz; ++i1)
      for (int i2 = 0; i2 < g.nz; ++i2) cplane_[i1 * g.nz + i2] = line[i1] * line[i2];
  }
  const std::size_t plane = g.slab_size();
  cplx* q = wf.data();
  const cplx* h = half_.data();
  for (int iR = 0; iR < g.nR; ++iR) {
    const std::size_t off = iR * plane;
    if (doubled) {
      for (std::size_t i = 0; i < plane; ++i) q[off + i] *= h[off + i] * h[off + i] * cplane_[i];
    } else {
      for (std::size_t i = 0; i < plane; ++i) q[off + i] *= h[off + i] * cplane_[i];
    }
  }
}

void SplitStepper::kinetic(WaveFunction& wf) {
  const auto& g = *spec_;
  static constexpr std::array<int, 3> axes{0, 1, 2};
  const auto dims = g.dims();
  cached_plan(dims, axes, FftDirection::forward).execute(wf.data());
  const std::size_t plane = g.slab_size();
  cplx* q = wf.data();
  for (int iR = 0; iR < g.nR; ++iR) {
    const cplx a = kR_[iR];
    cplx* s = q + iR * plane;
    for (std::size_t i = 0; i < plane; ++i) s[i] *= a * kplane_[i];
  }
  cached_plan(dims, axes, FftDirection::backward).execute(wf.data());
}

void SplitStepper::step(WaveFunction& wf, double field_mid) {
  require_coordinate(wf, "step");
  if (wf.spec_ptr() != spec_ && wf.spec().dims() != spec_->dims())
    throw UsageError("wave function and potential live on different grids");
  if (pending_)
    apply_phase(wf, true, *pending_, field_mid);
  else
    apply_phase(wf, false, field_mid, 0.0);
  kinetic(wf);
  pending_ = field_mid;
}

void SplitStepper::flush(WaveFunction& wf) {
  if (!pending_) return;
  apply_phase(wf, false, *pending_, 0.0);
  pending_.reset();
}

void step_real(WaveFunction& wf, const PotentialGrid& potential, double field_mid, double dt,
               const Masses& masses) {
  SplitStepper s(potential, dt, masses);
  s.step(wf, field_mid);
  s.flush(wf);
}

void PropagationConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (observe_every < 1) throw ConfigError("observable cadence must be >= 1");
  if (!(stability_limit > 0.0)) throw ConfigError("stability limit must be positive");
  masses.validate();
}

PropagationResult propagate(WaveFunction& wf, const PotentialGrid& potential, const PulseParams& pulse,
                            const PropagationConfig& cfg, const PropagationHooks& hooks,
                            const std::optional<ResumePoint>& resume) {
  cfg.validate();
  require_coordinate(wf, "propagate");
  const auto& g = wf.spec();
  const RegionPartition part = classify_regions(g, cfg.z_A);
  if (cfg.absorber.enabled && !(cfg.z_A < cfg.absorber.z_onset.value_or(0.8 * g.z_max)))
    throw ConfigError("z_A must lie inside the absorber onset");
  const AbsorberMask mask(g, cfg.absorber);
  SplitStepper stepper(potential, cfg.dt, cfg.masses);

  PropagationResult res;
  res.tally = resume ? resume->tally : AbsorbedTally::zeros(g.nR, cfg.absorber.enabled);
  std::size_t n = resume ? resume->step : 0;
  auto time_at = [&](std::size_t k) { return cfg.t_begin + static_cast<double>(k) * cfg.dt; };
  const double start_total = norm2(wf) + res.tally.total();

  auto view = [&](std::size_t k) {
    return StepView{k, time_at(k), field(time_at(k), pulse), wf, res.tally};
  };
  if (!resume && hooks.observe) hooks.observe(view(n));

  while (n < cfg.n_steps) {
    stepper.step(wf, field(time_at(n) + 0.5 * cfg.dt, pulse));
    mask.apply(wf, part, res.tally);
    ++n;
    const bool obs = n % cfg.observe_every == 0 || n == cfg.n_steps;
    const bool chk = cfg.checkpoint_every > 0 && n % cfg.checkpoint_every == 0;
    if (!obs && !chk) continue;
    stepper.flush(wf);
    const double total = norm2(wf) + res.tally.total();
    if (!std::isfinite(total) || total - start_total > cfg.stability_limit)
      throw StabilityError("norm grew by " + std::to_string(total - start_total) + " at step " +
                           std::to_string(n) + "; reduce dt");
    if (obs && hooks.observe) hooks.observe(view(n));
    if (chk && hooks.checkpoint) hooks.checkpoint(view(n));
  }
  stepper.flush(wf);
  res.steps = n;
  res.t_end = time_at(n);
  return res;
}

PropagationResult propagate(WaveFunction& wf, const SofteningTable& table, const PulseParams& pulse,
                            const PropagationConfig& cfg, const PropagationHooks& hooks,
                            const std::optional<ResumePoint>& resume) {
  const PotentialGrid v = eval_potential_grid(wf.spec_ptr(), table);
  return propagate(wf, v, pulse, cfg, hooks, resume);
}

WaveFunction default_seed(std::shared_ptr<const GridSpec> spec, double R0, double z0, double sigma_R,
                          double sigma_z) {
  WaveFunction wf(spec);
  const auto& g = *spec;
  std::vector<double> gp(g.nz), gm(g.nz);
  for (int i = 0; i < g.nz; ++i) {
    const double z = g.z_points[i];
    gp[i] = std::exp(-0.25 * (z - z0) * (z - z0) / (sigma_z * sigma_z));
    gm[i] = std::exp(-0.25 * (z + z0) * (z + z0) / (sigma_z * sigma_z));
  }
  for (int iR = 0; iR < g.nR; ++iR) {
    const double d = g.R_points[iR] - R0;
    const double fR = std::exp(-0.25 * d * d / (sigma_R * sigma_R));
    for (int i1 = 0; i1 < g.nz; ++i1)
      for (int i2 = 0; i2 < g.nz; ++i2)
        wf(iR, i1, i2) = fR * (gp[i1] * gm[i2] + gm[i1] * gp[i2]);
  }
  project_exchange_parity(wf.amps(), g.nz, g.nR);
  wf.normalize();
  return wf;
}

SpectralBox grid_box(const GridSpec& g, const Masses& m) {
  return SpectralBox{{g.nR, g.nz, g.nz}, {g.dR, g.dz, g.dz}, {m.mu_R, m.m_e, m.m_e}};
}

ImaginaryTimeConfig default_groundstate_schedule() {
  ImaginaryTimeConfig c;
  c.dt_schedule = {0.5, 0.1, 0.05};
  c.tolerance = 1e-10;
  c.check_interval = 10;
  c.max_steps = 50000;
  return c;
}

GroundState relax_imaginary(WaveFunction wf0, const PotentialGrid& potential, const Masses& masses,
                            const ImaginaryTimeConfig& cfg) {
  require_coordinate(wf0, "relax_imaginary");
  masses.validate();
  const auto& g = wf0.spec();
  const SpectralBox box = grid_box(g, masses);
  const int nz = g.nz;
  const std::size_t slabs = static_cast<std::size_t>(g.nR);
  RelaxationResult r = relax_in_box(box, potential.values, wf0.storage(), cfg,
                                    [nz, slabs](std::span<cplx> p) { project_exchange_parity(p, nz, slabs); });
  return GroundState{std::move(wf0), std::move(r)};
}

double total_energy(const WaveFunction& wf, const PotentialGrid& potential, const Masses& masses,
                    double field_value) {
  require_coordinate(wf, "total_energy");
  const auto& g = wf.spec();
  const SpectralBox box = grid_box(g, masses);
  const RealBuffer kin = kinetic_spectrum(box);
  ComplexBuffer scratch;
  if (field_value == 0.0) return box_energy(box, potential.values, kin, wf.amps(), scratch);
  RealBuffer w(potential.values);
  for (int iR = 0; iR < g.nR; ++iR)
    for (int i1 = 0; i1 < g.nz; ++i1)
      for (int i2 = 0; i2 < g.nz; ++i2)
        w[g.index(iR, i1, i2)] += (g.z_points[i1] + g.z_points[i2]) * field_value;
  return box_energy(box, w, kin, wf.amps(), scratch);
}

}  // namespace h2dyn

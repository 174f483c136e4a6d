#include "h2dyn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "h2dyn/error.hpp"
#include "h2dyn/grid.hpp"

namespace h2dyn {

std::size_t SpectralBox::size() const noexcept {
  std::size_t n = 1;
  for (int d : dims) n *= static_cast<std::size_t>(d);
  return n;
}

double SpectralBox::cell_volume() const noexcept {
  double v = 1.0;
  for (double s : spacing) v *= s;
  return v;
}

RealBuffer kinetic_spectrum(const SpectralBox& box) {
  const std::size_t rank = box.dims.size();
  std::vector<std::vector<double>> t(rank);
  for (std::size_t a = 0; a < rank; ++a) {
    const auto k = fft_wavenumbers(box.dims[a], box.spacing[a]);
    t[a].resize(k.size());
    for (std::size_t m = 0; m < k.size(); ++m) t[a][m] = 0.5 * k[m] * k[m] / box.mass[a];
  }
  RealBuffer out(box.size());
  std::vector<std::size_t> idx(rank, 0);
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    double e = 0.0;
    for (std::size_t a = 0; a < rank; ++a) e += t[a][idx[a]];
    out[flat] = e;
    for (std::size_t a = rank; a-- > 0;) {
      if (++idx[a] < static_cast<std::size_t>(box.dims[a])) break;
      idx[a] = 0;
    }
  }
  return out;
}

namespace {

std::vector<int> all_axes_of(const SpectralBox& box) {
  std::vector<int> ax(box.dims.size());
  std::iota(ax.begin(), ax.end(), 0);
  return ax;
}

double sum_norm(std::span<const cplx> v) {
  double acc = 0.0;
  for (const auto& x : v) acc += std::norm(x);
  return acc;
}

}  // namespace

double box_energy(const SpectralBox& box, std::span<const double> potential,
                  std::span<const double> kinetic, std::span<const cplx> state,
                  ComplexBuffer& scratch) {
  const auto axes = all_axes_of(box);
  scratch.assign(state.begin(), state.end());
  double pot = 0.0, nrm = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const double w = std::norm(state[i]);
    pot += potential[i] * w;
    nrm += w;
  }
  cached_plan(box.dims, axes, FftDirection::forward).execute(scratch.data());
  double kin = 0.0, knrm = 0.0;
  for (std::size_t i = 0; i < scratch.size(); ++i) {
    const double w = std::norm(scratch[i]);
    kin += kinetic[i] * w;
    knrm += w;
  }
  return kin / knrm + pot / nrm;
}

RelaxationResult relax_in_box(const SpectralBox& box, std::span<const double> potential,
                              ComplexBuffer& state, const ImaginaryTimeConfig& cfg,
                              const Projector& project) {
  const std::size_t n = box.size();
  if (state.size() != n || potential.size() != n) throw UsageError("relax_in_box: size mismatch");
  if (cfg.dt_schedule.empty()) throw ConfigError("imaginary-time schedule is empty");
  if (cfg.check_interval < 1) throw ConfigError("check_interval must be >= 1");

  const auto axes = all_axes_of(box);
  const auto& fwd = cached_plan(box.dims, axes, FftDirection::forward);
  const auto& bwd = cached_plan(box.dims, axes, FftDirection::backward);
  const RealBuffer kinetic = kinetic_spectrum(box);
  const double cell = box.cell_volume();
  ComplexBuffer scratch(n);

  // Returns the squared norm before rescaling.
  auto normalize = [&] {
    const double nn = sum_norm(state) * cell;
    if (!(nn > 0.0) || !std::isfinite(nn))
      throw ConvergenceError("imaginary-time state collapsed", 0.0, 0.0);
    const double s = 1.0 / std::sqrt(nn);
    for (auto& v : state) v *= s;
    return nn;
  };

  if (project) project(state);
  normalize();
  RelaxationResult res;
  double energy = box_energy(box, potential, kinetic, state, scratch);

  RealBuffer half(n), full(n), kin(n);
  for (std::size_t stage = 0; stage < cfg.dt_schedule.size(); ++stage) {
    const double dt = cfg.dt_schedule[stage];
    if (!(dt > 0.0)) throw ConfigError("imaginary-time step must be positive");
    const double shift = energy;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      half[i] = std::exp(-0.5 * (potential[i] - shift) * dt);
      full[i] = half[i] * half[i];
      kin[i] = std::exp(-kinetic[i] * dt) * inv_n;
    }
    std::size_t stage_steps = 0;
    for (;;) {
      for (int s = 0; s < cfg.check_interval; ++s) {
        const RealBuffer& v = s == 0 ? half : full;
        for (std::size_t i = 0; i < n; ++i) state[i] *= v[i];
        fwd.execute(state.data());
        for (std::size_t i = 0; i < n; ++i) state[i] *= kin[i];
        bwd.execute(state.data());
      }
      for (std::size_t i = 0; i < n; ++i) state[i] *= half[i];
      if (project) project(state);
      const double decay = normalize();
      stage_steps += cfg.check_interval;
      res.steps += cfg.check_interval;
      res.history.push_back(shift - std::log(decay) / (2.0 * cfg.check_interval * dt));
      res.history_stage.push_back(static_cast<int>(stage));

      const double updated = box_energy(box, potential, kinetic, state, scratch);
      res.residual = std::abs(updated - energy) / std::max(std::abs(updated), 1.0);
      energy = updated;
      if (res.residual < cfg.tolerance) break;
      if (stage_steps >= cfg.max_steps)
        throw ConvergenceError("imaginary-time relaxation did not converge within " +
                                   std::to_string(cfg.max_steps) + " steps (dt=" +
                                   std::to_string(dt) + ")",
                               energy, res.residual);
    }
  }
  res.energy = energy;
  return res;
}

void project_parity_line(std::span<cplx> psi, int n) {
  for (int i = 1; i < n / 2; ++i) {
    const cplx avg = 0.5 * (psi[i] + psi[n - i]);
    psi[i] = avg;
    psi[n - i] = avg;
  }
}

void project_exchange_parity(std::span<cplx> psi, int n, std::size_t slabs) {
  const std::size_t plane = static_cast<std::size_t>(n) * n;
  auto mirror = [n](int i) { return i == 0 ? 0 : n - i; };
  for (std::size_t s = 0; s < slabs; ++s) {
    cplx* p = psi.data() + s * plane;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const int mi = mirror(i), mj = mirror(j);
        // orbit {(i,j), (j,i), (mi,mj), (mj,mi)}
        const std::size_t a = i * n + j, b = j * n + i;
        const std::size_t c = mi * n + mj, d = mj * n + mi;
        const cplx avg = 0.25 * (p[a] + p[b] + p[c] + p[d]);
        p[a] = p[b] = p[c] = p[d] = avg;
      }
  }
}

}  // namespace h2dyn

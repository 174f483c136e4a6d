#include "h2dyn/laser.hpp"

#include <cmath>
#include <numbers>

#include "h2dyn/error.hpp"
#include "h2dyn/units.hpp"

namespace h2dyn {

double omega_from_wavelength_nm(double lambda_nm) {
  if (!(lambda_nm > 0.0)) throw ConfigError("wavelength must be positive");
  return 2.0 * std::numbers::pi * units::speed_of_light / (lambda_nm / units::bohr_nm);
}

double wavelength_nm_from_omega(double omega) {
  if (!(omega > 0.0)) throw ConfigError("angular frequency must be positive");
  return 2.0 * std::numbers::pi * units::speed_of_light / omega * units::bohr_nm;
}

double field_from_intensity(double intensity_Wcm2) {
  if (intensity_Wcm2 < 0.0) throw ConfigError("intensity must be non-negative");
  return std::sqrt(intensity_Wcm2 / units::intensity_au_Wcm2);
}

double intensity_from_field(double E0) { return E0 * E0 * units::intensity_au_Wcm2; }

PulseParams PulseInput::resolve() const {
  auto count = [](auto... o) { return (static_cast<int>(o.has_value()) + ...); };
  if (count(wavelength_nm, omega) != 1)
    throw ConfigError("pulse: give exactly one of wavelength_nm, omega");
  if (count(intensity_Wcm2, E0) != 1)
    throw ConfigError("pulse: give exactly one of intensity_Wcm2, E0");
  if (count(tau, duration_fs, cycles) != 1)
    throw ConfigError("pulse: give exactly one of tau, duration_fs, cycles");

  PulseParams p;
  p.omega = omega ? *omega : omega_from_wavelength_nm(*wavelength_nm);
  if (!(p.omega > 0.0)) throw ConfigError("pulse: omega must be positive");
  p.E0 = E0 ? *E0 : field_from_intensity(*intensity_Wcm2);
  if (p.E0 < 0.0) throw ConfigError("pulse: field amplitude must be non-negative");
  if (tau) p.tau = *tau;
  else if (duration_fs) p.tau = *duration_fs * units::au_time_per_fs;
  else p.tau = *cycles * 2.0 * std::numbers::pi / p.omega;
  if (!(p.tau > 0.0)) throw ConfigError("pulse: duration must be positive");
  p.phi = phi;
  p.t_start = t_start;
  return p;
}

double envelope(double t, const PulseParams& p) noexcept {
  const double s = t - p.t_start;
  if (s < 0.0 || s > p.tau) return 0.0;
  const double v = std::sin(std::numbers::pi * s / p.tau);
  return v * v;
}

double field(double t, const PulseParams& p) noexcept {
  const double f = envelope(t, p);
  if (f == 0.0) return 0.0;
  return p.E0 * f * std::cos(p.omega * (t - p.t_start) + p.phi);
}

double ponderomotive(double E_max, double omega) {
  if (!(omega > 0.0)) throw DomainError("ponderomotive energy needs omega > 0");
  return E_max * E_max / (4.0 * omega * omega);
}

PulseParams single_cycle(PulseParams p) {
  p.tau = 2.0 * std::numbers::pi / p.omega;
  p.phi = -0.5 * std::numbers::pi;
  return p;
}

namespace {

double field_slope(double t, const PulseParams& p) noexcept {
  const double s = t - p.t_start;
  const double a = std::numbers::pi / p.tau, ph = p.omega * s + p.phi;
  const double sn = std::sin(a * s);
  return p.E0 * (a * std::sin(2.0 * a * s) * std::cos(ph) - p.omega * sn * sn * std::sin(ph));
}

// Root of dE/dt on [a, b], given a sign change. Bisection to adjacent doubles,
// since the extremum time is far better conditioned than the field value.
double slope_root(const PulseParams& p, double a, double b) {
  const bool rising = field_slope(a, p) > 0.0;
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    if ((field_slope(m, p) > 0.0) == rising) a = m;
    else b = m;
  }
  return 0.5 * (a + b);
}

}  // namespace

std::vector<FieldExtremum> field_extrema(const PulseParams& p) {
  constexpr int n = 20000;
  const double h = p.tau / n;
  std::vector<FieldExtremum> out;
  for (int i = 1; i < n; ++i) {
    const double t0 = p.t_start + (i - 1) * h, t1 = t0 + h, t2 = t1 + h;
    const double f0 = field(t0, p), f1 = field(t1, p), f2 = field(t2, p);
    const bool is_max = f1 > f0 && f1 >= f2;
    const bool is_min = f1 < f0 && f1 <= f2;
    if (!is_max && !is_min) continue;
    if ((field_slope(t0, p) > 0.0) == (field_slope(t2, p) > 0.0)) continue;
    const double t = slope_root(p, t0, t2);
    out.push_back({t, field(t, p)});
  }
  return out;
}

FieldExtremum peak_field(const PulseParams& p) {
  FieldExtremum best{p.t_start, 0.0};
  for (const auto& e : field_extrema(p))
    if (std::abs(e.value) > std::abs(best.value)) best = e;
  return best;
}

}  // namespace h2dyn

#pragma once

#include <optional>
#include <vector>

namespace h2dyn {

/// Resolved pulse, all atomic units. E(t) = E0 f(t) cos(omega (t - t_start) + phi)
/// with f(t) = sin^2(pi (t - t_start) / tau) on [t_start, t_start + tau].
struct PulseParams {
  double omega = 0.0;
  double E0 = 0.0;
  double tau = 0.0;
  double phi = 0.0;
  double t_start = 0.0;

  double t_end() const noexcept { return t_start + tau; }
};

/// Configuration-boundary input; exactly one member of each alternative
/// group must be set: {wavelength_nm, omega}, {intensity_Wcm2, E0},
/// {tau, duration_fs, cycles}.
struct PulseInput {
  std::optional<double> wavelength_nm;
  std::optional<double> omega;
  std::optional<double> intensity_Wcm2;
  std::optional<double> E0;
  std::optional<double> tau;
  std::optional<double> duration_fs;
  std::optional<double> cycles;
  double phi = 0.0;
  double t_start = 0.0;

  /// Throws ConfigError on a missing or doubly specified group.
  PulseParams resolve() const;
};

double omega_from_wavelength_nm(double lambda_nm);
double wavelength_nm_from_omega(double omega);
double field_from_intensity(double intensity_Wcm2);
double intensity_from_field(double E0);

double envelope(double t, const PulseParams& p) noexcept;
double field(double t, const PulseParams& p) noexcept;

/// E_max^2 / (4 omega^2).
double ponderomotive(double E_max, double omega);

/// tau = 2 pi / omega, phi = -pi/2.
PulseParams single_cycle(PulseParams p);

struct FieldExtremum {
  double t;
  double value;
};

/// Largest |E(t)| inside the pulse window: dense scan, then bisection on dE/dt.
/// Returns the signed field value at that time.
FieldExtremum peak_field(const PulseParams& p);

/// Local extrema of E(t) inside the window in time order.
std::vector<FieldExtremum> field_extrema(const PulseParams& p);

}  // namespace h2dyn

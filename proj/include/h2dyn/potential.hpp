#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "h2dyn/digest.hpp"
#include "h2dyn/fft.hpp"
#include "h2dyn/grid.hpp"
#include "h2dyn/spectral.hpp"

namespace h2dyn {

/// Two-electron, two-proton collinear soft-Coulomb energy
///   1/R + [(z2 - z1)^2 + alpha^2]^(-1/2) - sum_{i, s=+-1} [(z_i + s R/2)^2 + beta^2]^(-1/2)
/// Throws DomainError unless R, alpha, beta > 0.
double soft_coulomb(double R, double z1, double z2, double alpha, double beta);

/// Attraction of one electron at z to both protons (no 1/R term).
double electron_nuclear(double R, double z, double beta);

/// Natural cubic spline; evaluation outside the knot range clamps to the end
/// values.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double derivative(double x) const;
  const std::vector<double>& x() const noexcept { return x_; }
  const std::vector<double>& y() const noexcept { return y_; }

 private:
  std::size_t interval(double x) const;
  std::vector<double> x_, y_, m_;  // m_ = second derivatives
};

/// alpha(R), beta(R) as smooth functions of R.
class SofteningTable {
 public:
  SofteningTable(std::vector<double> knots, std::vector<double> alpha,
                 std::vector<double> beta);

  /// R-independent softening; handy for tests and reduced models.
  static SofteningTable constant(double alpha, double beta);

  double alpha(double R) const { return alpha_(R); }
  double beta(double R) const { return beta_(R); }
  const std::vector<double>& knots() const noexcept { return alpha_.x(); }
  const std::vector<double>& alpha_values() const noexcept { return alpha_.y(); }
  const std::vector<double>& beta_values() const noexcept { return beta_.y(); }

  /// Free-form '#' header lines preserved through write/read.
  std::vector<std::string> metadata;

 private:
  CubicSpline alpha_, beta_;
};

enum class CurveLabel { H2, H2plus };

/// Tabulated total Born-Oppenheimer energy (1/R included).
struct ReferenceCurve {
  std::vector<double> R;
  std::vector<double> energy;
  CurveLabel label = CurveLabel::H2;
  std::string digest;  // sha256 of the source file, empty if built in memory
  CubicSpline spline;

  /// Validates ascending samples and builds the interpolant.
  static ReferenceCurve from_samples(std::vector<double> R, std::vector<double> energy,
                                     CurveLabel label);

  /// Spline-interpolated energy; DomainError outside the sampled range.
  double at(double R) const;
  double min_R() const { return R.front(); }
  double max_R() const { return R.back(); }
};

/// Two whitespace-separated columns (R, E) after '#' comment lines.
ReferenceCurve read_reference_curve(const std::filesystem::path& path, CurveLabel label);
ReferenceCurve parse_reference_curve(const std::string& text, CurveLabel label);

/// Text format: '#' header lines, then columns R alpha beta.
void write_softening_table(const std::filesystem::path& path, const SofteningTable& table);
SofteningTable read_softening_table(const std::filesystem::path& path);
/// SHA-256 of the knot values (metadata excluded).
Digest softening_digest(const SofteningTable& table);

/// soft_coulomb tabulated on the full (R, z1, z2) grid for one softening table.
struct PotentialGrid {
  std::shared_ptr<const GridSpec> spec;
  RealBuffer values;

  double operator()(int iR, int i1, int i2) const {
    return values[spec->index(iR, i1, i2)];
  }
};

PotentialGrid eval_potential_grid(const GridSpec& spec, const SofteningTable& table);
PotentialGrid eval_potential_grid(std::shared_ptr<const GridSpec> spec,
                                  const SofteningTable& table);

/// 1D/2D electronic problems at fixed R on the electron axis of the main grid.
struct ReducedSolverConfig {
  int nz = 128;
  double z_max = 60.0;
  ImaginaryTimeConfig itime{};
};

/// 1/R + electron_nuclear(z) on the reduced z grid.
std::vector<double> h2plus_potential_line(double R, double beta, const ReducedSolverConfig& cfg);
/// soft_coulomb(R, z1, z2) on the reduced (z1, z2) grid, z2 fastest.
std::vector<double> h2_potential_plane(double R, double alpha, double beta,
                                       const ReducedSolverConfig& cfg);

/// Ground-state total energy E_el + 1/R of H2+ (gerade) and H2 (exchange
/// symmetric, gerade). `warm` optionally carries the state between calls.
double h2plus_energy(double R, double beta, const ReducedSolverConfig& cfg,
                     ComplexBuffer* warm = nullptr);
double h2_energy(double R, double alpha, double beta, const ReducedSolverConfig& cfg,
                 ComplexBuffer* warm = nullptr);

SpectralBox line_box(const ReducedSolverConfig& cfg);
SpectralBox plane_box(const ReducedSolverConfig& cfg);

}  // namespace h2dyn

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "h2dyn/grid.hpp"

namespace h2dyn {

/// Region label of every (z1, z2) pair, shared by all R slabs:
///   0: |z1| <= z_A and |z2| <= z_A   (H2)
///   1: exactly one |z_i| > z_A        (H2+)
///   2: both |z_i| > z_A               (H2++)
struct RegionPartition {
  double z_A = 20.0;
  int nz = 0;
  std::vector<std::uint8_t> label;

  int region(int i1, int i2) const noexcept { return label[static_cast<std::size_t>(i1) * nz + i2]; }
  std::size_t count(int k) const;
};

/// Throws ConfigError if z_A >= z_max or z_A <= 0.
RegionPartition classify_regions(const GridSpec& spec, double z_A);
int classify_point(double z1, double z2, double z_A) noexcept;

/// {P0, P1, P2}; their sum is norm2(wf).
std::array<double, 3> probabilities(const WaveFunction& wf, const RegionPartition& part);

/// P_k(R) = integral over Gamma_k of |psi|^2 dz1 dz2, a density in R.
struct NuclearDistribution {
  int region = 0;
  double t = 0.0;
  double dR = 0.0;
  std::vector<double> R;
  std::vector<double> values;

  double integral() const;
};

NuclearDistribution nuclear_distribution(const WaveFunction& wf, const RegionPartition& part,
                                         int k, double t = 0.0);

/// Per (region, R-bin) probability removed by the absorbing mask or, for the
/// Gamma_2 rows, recorded by the virtual detector. Values are probabilities,
/// not densities.
struct AbsorbedTally {
  bool enabled = false;
  std::array<std::vector<double>, 3> by_region;

  static AbsorbedTally zeros(int nR, bool enabled = true);
  double region_total(int k) const;
  double total() const;
  void add(const AbsorbedTally& other);
};

enum class KerProvenance { from_final_P2, from_accumulated_flux };

/// Proton kinetic energy release S(E), E = 1/(2R) hartree per proton.
struct KERSpectrum {
  std::vector<double> edges_eV;
  std::vector<double> S_per_eV;
  KerProvenance provenance = KerProvenance::from_final_P2;

  std::size_t bins() const noexcept { return S_per_eV.size(); }
  double center_eV(std::size_t i) const noexcept { return 0.5 * (edges_eV[i] + edges_eV[i + 1]); }
  std::vector<double> edges_hartree() const;
  std::vector<double> S_per_hartree() const;
  double integral() const;
};

struct KerBinning {
  double width_eV = 0.1;
  /// Upper edge; 0 extends the axis until every non-empty R cell fits.
  double max_eV = 0.0;
};

/// Maps R-cell weights onto the energy axis. Each cell [R - dR/2, R + dR/2] is
/// taken as uniformly populated and split over energy bins by the measure of
/// its preimage, so the integral is preserved exactly. Weight outside a
/// user-specified max_eV raises DomainError.
KERSpectrum ker_from_weights(std::span<const double> R, double dR,
                             std::span<const double> weights, const KerBinning& bins,
                             KerProvenance provenance);

KERSpectrum ker_map(const NuclearDistribution& P2, const KerBinning& bins = {});

/// S(E) of final on-grid P2 plus the Gamma_2 flux absorbed during the run.
/// UsageError if the tally was not recorded.
KERSpectrum accumulate_ker(const AbsorbedTally& tally, const NuclearDistribution& final_P2,
                           const KerBinning& bins = {});

/// Peak of a binned spectrum: parabolic refinement of the highest bin and the
/// full width at half maximum by linear interpolation.
struct SpectrumPeak {
  double center_eV = 0.0;
  double height = 0.0;
  double fwhm_eV = 0.0;
  std::size_t bin = 0;
};

SpectrumPeak find_peak(const KERSpectrum& s);

/// |psi(R, z1, z2)|^2 over (z1, z2), z2 fastest.
struct DensitySnapshot {
  double t = 0.0;
  double R = 0.0;        // nearest grid R, or the slab centre
  double R_lo = 0.0, R_hi = 0.0;
  int nz = 0;
  std::vector<double> density;

  /// log10(max(density, floor)).
  std::vector<double> log10_density(double floor = 1e-12) const;
};

/// Nearest-R slice. DomainError if R_value lies outside [dR/2, R_max + dR/2).
DensitySnapshot snapshot_density(const WaveFunction& wf, double R_value, double t = 0.0);
/// Integral over the R points in [R_lo, R_hi].
DensitySnapshot snapshot_density_slab(const WaveFunction& wf, double R_lo, double R_hi,
                                      double t = 0.0);

}  // namespace h2dyn

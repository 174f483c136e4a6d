#include "h2dyn/observables.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "h2dyn/error.hpp"
#include "h2dyn/units.hpp"

namespace h2dyn {

int classify_point(double z1, double z2, double z_A) noexcept {
  return static_cast<int>(std::abs(z1) > z_A) + static_cast<int>(std::abs(z2) > z_A);
}

std::size_t RegionPartition::count(int k) const {
  return static_cast<std::size_t>(std::count(label.begin(), label.end(), static_cast<std::uint8_t>(k)));
}

RegionPartition classify_regions(const GridSpec& spec, double z_A) {
  if (!(z_A > 0.0)) throw ConfigError("z_A must be positive");
  if (!(z_A < spec.z_max)) throw ConfigError("z_A must be smaller than z_max");
  RegionPartition p;
  p.z_A = z_A;
  p.nz = spec.nz;
  p.label.resize(spec.slab_size());
  for (int i1 = 0; i1 < spec.nz; ++i1)
    for (int i2 = 0; i2 < spec.nz; ++i2)
      p.label[static_cast<std::size_t>(i1) * spec.nz + i2] =
          static_cast<std::uint8_t>(classify_point(spec.z_points[i1], spec.z_points[i2], z_A));
  return p;
}

namespace {

void require_coordinate(const WaveFunction& wf, const char* what) {
  if (!wf.in_coordinate_space()) throw UsageError(std::string(what) + " requires coordinate representation");
}

// Per-slab region sums of |psi|^2 (not yet multiplied by the volume element).
std::array<double, 3> slab_region_sums(const WaveFunction& wf, const RegionPartition& part, int iR) {
  const auto& g = wf.spec();
  const cplx* q = wf.data() + static_cast<std::size_t>(iR) * g.slab_size();
  std::array<double, 3> acc{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < g.slab_size(); ++i) acc[part.label[i]] += std::norm(q[i]);
  return acc;
}

}  // namespace

std::array<double, 3> probabilities(const WaveFunction& wf, const RegionPartition& part) {
  require_coordinate(wf, "probabilities");
  const auto& g = wf.spec();
  if (part.nz != g.nz) throw UsageError("region partition built for another grid");
  std::vector<std::array<double, 3>> per(g.nR);
  for (int iR = 0; iR < g.nR; ++iR) per[iR] = slab_region_sums(wf, part, iR);
  std::array<double, 3> out{0.0, 0.0, 0.0};
  for (const auto& s : per)
    for (int k = 0; k < 3; ++k) out[k] += s[k];
  for (auto& v : out) v *= g.volume_element();
  return out;
}

double NuclearDistribution::integral() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * dR;
}

NuclearDistribution nuclear_distribution(const WaveFunction& wf, const RegionPartition& part,
                                         int k, double t) {
  require_coordinate(wf, "nuclear_distribution");
  if (k < 0 || k > 2) throw UsageError("region index must be 0, 1 or 2");
  const auto& g = wf.spec();
  NuclearDistribution d;
  d.region = k;
  d.t = t;
  d.dR = g.dR;
  d.R = g.R_points;
  d.values.resize(g.nR);
  const double dzz = g.dz * g.dz;
  for (int iR = 0; iR < g.nR; ++iR) d.values[iR] = slab_region_sums(wf, part, iR)[k] * dzz;
  return d;
}

AbsorbedTally AbsorbedTally::zeros(int nR, bool enabled) {
  AbsorbedTally t;
  t.enabled = enabled;
  for (auto& r : t.by_region) r.assign(static_cast<std::size_t>(nR), 0.0);
  return t;
}

double AbsorbedTally::region_total(int k) const {
  double s = 0.0;
  for (double v : by_region[k]) s += v;
  return s;
}

double AbsorbedTally::total() const { return region_total(0) + region_total(1) + region_total(2); }

void AbsorbedTally::add(const AbsorbedTally& other) {
  for (int k = 0; k < 3; ++k) {
    if (by_region[k].size() != other.by_region[k].size()) throw UsageError("tally size mismatch");
    for (std::size_t j = 0; j < by_region[k].size(); ++j) by_region[k][j] += other.by_region[k][j];
  }
}

std::vector<double> KERSpectrum::edges_hartree() const {
  std::vector<double> e(edges_eV);
  for (auto& v : e) v /= units::hartree_eV;
  return e;
}

std::vector<double> KERSpectrum::S_per_hartree() const {
  std::vector<double> s(S_per_eV);
  for (auto& v : s) v *= units::hartree_eV;
  return s;
}

double KERSpectrum::integral() const {
  double s = 0.0;
  for (std::size_t i = 0; i < S_per_eV.size(); ++i) s += S_per_eV[i] * (edges_eV[i + 1] - edges_eV[i]);
  return s;
}

KERSpectrum ker_from_weights(std::span<const double> R, double dR, std::span<const double> weights,
                             const KerBinning& bins, KerProvenance provenance) {
  if (!(bins.width_eV > 0.0)) throw ConfigError("KER bin width must be positive");
  if (R.size() != weights.size()) throw UsageError("ker: R and weight counts differ");
  auto energy_eV = [](double r) { return units::hartree_eV / (2.0 * r); };

  double top = bins.max_eV;
  if (top <= 0.0) {
    top = bins.width_eV;
    for (std::size_t j = 0; j < R.size(); ++j)
      if (weights[j] != 0.0) top = std::max(top, energy_eV(std::max(R[j] - 0.5 * dR, 0.5 * dR)));
  }
  const std::size_t nbins = static_cast<std::size_t>(std::ceil(top / bins.width_eV - 1e-9));
  KERSpectrum s;
  s.provenance = provenance;
  s.edges_eV.resize(nbins + 1);
  for (std::size_t i = 0; i <= nbins; ++i) s.edges_eV[i] = i * bins.width_eV;
  s.S_per_eV.assign(nbins, 0.0);
  const double e_top = s.edges_eV.back();

  for (std::size_t j = 0; j < R.size(); ++j) {
    const double w = weights[j];
    if (w == 0.0) continue;
    // Cell R range; the first cell is clipped at dR/2 so E stays finite.
    const double r_lo = std::max(R[j] - 0.5 * dR, 0.5 * dR);
    const double r_hi = R[j] + 0.5 * dR;
    const double e_lo = energy_eV(r_hi), e_hi = energy_eV(r_lo);
    if (e_hi > e_top * (1.0 + 1e-12))
      throw DomainError("KER weight above the configured energy range");
    const double span = r_hi - r_lo;
    std::size_t b = static_cast<std::size_t>(std::floor(e_lo / bins.width_eV));
    for (; b < nbins && s.edges_eV[b] < e_hi; ++b) {
      const double a = std::max(s.edges_eV[b], e_lo), c = std::min(s.edges_eV[b + 1], e_hi);
      if (c <= a) continue;
      // preimage of [a, c] is [1/(2c), 1/(2a)] in R
      const double frac = (units::hartree_eV / (2.0 * a) - units::hartree_eV / (2.0 * c)) / span;
      s.S_per_eV[b] += w * frac / bins.width_eV;
    }
  }
  return s;
}

KERSpectrum ker_map(const NuclearDistribution& P2, const KerBinning& bins) {
  std::vector<double> w(P2.values.size());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = P2.values[j] * P2.dR;
  return ker_from_weights(P2.R, P2.dR, w, bins, KerProvenance::from_final_P2);
}

KERSpectrum accumulate_ker(const AbsorbedTally& tally, const NuclearDistribution& final_P2,
                           const KerBinning& bins) {
  if (!tally.enabled) throw UsageError("KER accumulation needs the absorber tally");
  const auto& flux = tally.by_region[2];
  if (flux.size() != final_P2.values.size()) throw UsageError("tally and P2 grids differ");
  std::vector<double> w(flux.size());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = final_P2.values[j] * final_P2.dR + flux[j];
  return ker_from_weights(final_P2.R, final_P2.dR, w, bins, KerProvenance::from_accumulated_flux);
}

SpectrumPeak find_peak(const KERSpectrum& s) {
  SpectrumPeak p;
  if (s.S_per_eV.empty()) return p;
  const auto it = std::max_element(s.S_per_eV.begin(), s.S_per_eV.end());
  const std::size_t i = static_cast<std::size_t>(it - s.S_per_eV.begin());
  p.bin = i;
  p.height = *it;
  p.center_eV = s.center_eV(i);
  if (i > 0 && i + 1 < s.bins()) {
    const double a = s.S_per_eV[i - 1], b = s.S_per_eV[i], c = s.S_per_eV[i + 1];
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) {
      const double shift = 0.5 * (a - c) / denom;
      p.center_eV += shift * (s.edges_eV[i + 1] - s.edges_eV[i]);
      p.height = b - 0.25 * (a - c) * shift;
    }
  }
  const double half = 0.5 * *it;
  double left = s.center_eV(0), right = s.center_eV(s.bins() - 1);
  for (std::size_t j = i; j-- > 0;) {
    if (s.S_per_eV[j] < half) {
      const double f = (half - s.S_per_eV[j]) / (s.S_per_eV[j + 1] - s.S_per_eV[j]);
      left = s.center_eV(j) + f * (s.center_eV(j + 1) - s.center_eV(j));
      break;
    }
  }
  for (std::size_t j = i + 1; j < s.bins(); ++j) {
    if (s.S_per_eV[j] < half) {
      const double f = (s.S_per_eV[j - 1] - half) / (s.S_per_eV[j - 1] - s.S_per_eV[j]);
      right = s.center_eV(j - 1) + f * (s.center_eV(j) - s.center_eV(j - 1));
      break;
    }
  }
  p.fwhm_eV = right - left;
  return p;
}

std::vector<double> DensitySnapshot::log10_density(double floor) const {
  std::vector<double> out(density.size());
  for (std::size_t i = 0; i < density.size(); ++i) out[i] = std::log10(std::max(density[i], floor));
  return out;
}

DensitySnapshot snapshot_density(const WaveFunction& wf, double R_value, double t) {
  require_coordinate(wf, "snapshot_density");
  const auto& g = wf.spec();
  if (!(R_value >= 0.5 * g.dR && R_value < g.R_max + 0.5 * g.dR))
    throw DomainError("snapshot R=" + std::to_string(R_value) + " outside the grid");
  int iR = static_cast<int>(std::lround(R_value / g.dR)) - 1;
  iR = std::clamp(iR, 0, g.nR - 1);
  DensitySnapshot s;
  s.t = t;
  s.R = g.R_points[iR];
  s.R_lo = s.R_hi = s.R;
  s.nz = g.nz;
  s.density.resize(g.slab_size());
  const cplx* q = wf.data() + static_cast<std::size_t>(iR) * g.slab_size();
  for (std::size_t i = 0; i < g.slab_size(); ++i) s.density[i] = std::norm(q[i]);
  return s;
}

DensitySnapshot snapshot_density_slab(const WaveFunction& wf, double R_lo, double R_hi, double t) {
  require_coordinate(wf, "snapshot_density_slab");
  const auto& g = wf.spec();
  if (!(R_hi >= R_lo)) throw DomainError("slab bounds reversed");
  if (R_hi < g.R_points.front() || R_lo > g.R_points.back()) throw DomainError("slab outside the grid");
  DensitySnapshot s;
  s.t = t;
  s.R_lo = R_lo;
  s.R_hi = R_hi;
  s.R = 0.5 * (R_lo + R_hi);
  s.nz = g.nz;
  s.density.assign(g.slab_size(), 0.0);
  for (int iR = 0; iR < g.nR; ++iR) {
    const double R = g.R_points[iR];
    if (R < R_lo || R > R_hi) continue;
    const cplx* q = wf.data() + static_cast<std::size_t>(iR) * g.slab_size();
    for (std::size_t i = 0; i < g.slab_size(); ++i) s.density[i] += std::norm(q[i]) * g.dR;
  }
  return s;
}

}  // namespace h2dyn

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "h2dyn/grid.hpp"
#include "h2dyn/laser.hpp"
#include "h2dyn/observables.hpp"
#include "h2dyn/potential.hpp"
#include "h2dyn/spectral.hpp"
#include "h2dyn/units.hpp"

namespace h2dyn {

struct Masses {
  double mu_R = units::nuclear_reduced_mass;
  double m_e = 1.0;

  void validate() const;
};

/// Multiplicative mask 1 inside the onsets, falling as cos^{1/8} to 0 at the
/// grid edge. The optional inner band sits just beyond z_A and removes
/// electrons before they can return to the core.
struct AbsorberSpec {
  bool enabled = false;
  std::optional<double> z_onset;  // default 0.8 z_max
  std::optional<double> R_onset;  // default 0.9 R_max
  double exponent = 0.125;
  bool inner = false;
  double inner_start = 22.0;
  double inner_width = 4.0;
};

class AbsorberMask {
 public:
  AbsorberMask(const GridSpec& spec, const AbsorberSpec& a);

  bool enabled() const noexcept { return enabled_; }
  const std::vector<double>& R_factor() const noexcept { return mR_; }
  const std::vector<double>& z_factor() const noexcept { return mz_; }
  double value(int iR, int i1, int i2) const noexcept { return mR_[iR] * mz_[i1] * mz_[i2]; }

  /// psi *= mask; the removed probability (1 - mask^2)|psi|^2 dV is added to
  /// `tally` by region and R slab. Only the |psi|^2 of a point matters, so
  /// this commutes with any pending potential phase.
  void apply(WaveFunction& wf, const RegionPartition& part, AbsorbedTally& tally) const;

 private:
  bool enabled_ = false;
  std::vector<double> mR_, mz_;
  std::vector<std::size_t> frame_;  // plane indices with mz1 mz2 < 1
};

AbsorbedTally apply_absorber(WaveFunction& wf, const AbsorberSpec& spec, const RegionPartition& part);

/// Strang step exp(-i W dt/2) exp(-i T dt) exp(-i W dt/2) with
/// W = V + (z1 + z2) E. The trailing half phase of one step is held back and
/// merged with the leading half of the next; densities |psi|^2 are exact at
/// any time, phases only after flush().
class SplitStepper {
 public:
  SplitStepper(const PotentialGrid& potential, double dt, const Masses& masses = {});

  void step(WaveFunction& wf, double field_mid);
  void flush(WaveFunction& wf);
  bool pending() const noexcept { return pending_.has_value(); }
  double dt() const noexcept { return dt_; }

 private:
  void apply_phase(WaveFunction& wf, bool doubled, double e_first, double e_second);
  void kinetic(WaveFunction& wf);

  std::shared_ptr<const GridSpec> spec_;
  double dt_;
  ComplexBuffer half_;   // exp(-i V dt/2)
  std::vector<cplx> kR_, kz_;  // exp(-i k^2 dt / 2m) per axis, 1/N folded into kR_
  std::vector<cplx> kplane_;
  std::vector<cplx> cplane_;
  std::optional<double> pending_;
};

/// One full step (half phases not merged). UsageError outside coordinate space.
void step_real(WaveFunction& wf, const PotentialGrid& potential, double field_mid, double dt,
               const Masses& masses = {});

struct PropagationConfig {
  double dt = 0.0413414;         // 1 as
  std::size_t n_steps = 0;
  std::size_t observe_every = 10;
  std::size_t checkpoint_every = 0;  // 0: never
  double t_begin = 0.0;
  double stability_limit = 1e-6;
  Masses masses{};
  AbsorberSpec absorber{};
  double z_A = 20.0;

  void validate() const;
};

struct StepView {
  std::size_t step = 0;
  double t = 0.0;
  double field = 0.0;
  const WaveFunction& wf;
  const AbsorbedTally& tally;
};

struct PropagationHooks {
  /// Called at step 0 and every observe_every steps with a flushed state.
  std::function<void(const StepView&)> observe;
  std::function<void(const StepView&)> checkpoint;
};

/// State to continue an interrupted run from.
struct ResumePoint {
  std::size_t step = 0;
  AbsorbedTally tally;
};

struct PropagationResult {
  std::size_t steps = 0;
  double t_end = 0.0;
  AbsorbedTally tally;
};

/// Field-driven run of cfg.n_steps steps. Throws StabilityError when the norm
/// plus absorbed probability grows by more than cfg.stability_limit.
PropagationResult propagate(WaveFunction& wf, const PotentialGrid& potential,
                            const PulseParams& pulse, const PropagationConfig& cfg,
                            const PropagationHooks& hooks = {},
                            const std::optional<ResumePoint>& resume = std::nullopt);

PropagationResult propagate(WaveFunction& wf, const SofteningTable& table,
                            const PulseParams& pulse, const PropagationConfig& cfg,
                            const PropagationHooks& hooks = {},
                            const std::optional<ResumePoint>& resume = std::nullopt);

/// Symmetric Gaussian product at (R0, +-z0), exchange and parity symmetrized.
WaveFunction default_seed(std::shared_ptr<const GridSpec> spec, double R0 = 1.4, double z0 = 0.7,
                          double sigma_R = 0.17, double sigma_z = 1.0);

struct GroundState {
  WaveFunction wf;
  RelaxationResult relaxation;
};

ImaginaryTimeConfig default_groundstate_schedule();

/// Imaginary-time relaxation on the full grid, restricted to exchange
/// symmetric gerade states.
GroundState relax_imaginary(WaveFunction wf0, const PotentialGrid& potential,
                            const Masses& masses = {},
                            const ImaginaryTimeConfig& cfg = default_groundstate_schedule());

/// <H> including the dipole term for a constant field, evaluated spectrally.
double total_energy(const WaveFunction& wf, const PotentialGrid& potential,
                    const Masses& masses = {}, double field_value = 0.0);

SpectralBox grid_box(const GridSpec& spec, const Masses& masses);

}  // namespace h2dyn

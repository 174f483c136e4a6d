#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "h2dyn/fft.hpp"

namespace h2dyn {

/// A periodic row-major box of 1-3 axes with a separable kinetic operator
/// sum_a k_a^2 / (2 m_a). Shared by the reduced (1D/2D) calibration
/// eigensolvers and the full 3D relaxation.
struct SpectralBox {
  std::vector<int> dims;
  std::vector<double> spacing;
  std::vector<double> mass;

  std::size_t size() const noexcept;
  double cell_volume() const noexcept;
};

/// Kinetic energy per flat momentum-space index (FFT ordering per axis).
RealBuffer kinetic_spectrum(const SpectralBox& box);

struct ImaginaryTimeConfig {
  /// Relaxation stages; each runs to convergence before the next, smaller
  /// step removes the splitting bias of the previous one.
  std::vector<double> dt_schedule{0.2, 0.05, 0.0125};
  /// Stage exit: |E_n - E_{n-1}| / max(|E_n|, 1) below this between checks.
  double tolerance = 1e-10;
  int check_interval = 10;
  std::size_t max_steps = 200000;  // per stage
};

struct RelaxationResult {
  double energy = 0.0;
  double residual = 0.0;
  std::size_t steps = 0;
  /// At every convergence check: the energy implied by the norm decay of the
  /// last check_interval steps. Power iteration with the symmetric positive
  /// step operator makes this non-increasing within a stage; <H> itself may
  /// rise slightly toward the stage's fixed point.
  std::vector<double> history;
  std::vector<int> history_stage;  // index into dt_schedule per history entry
};

/// In-place symmetry projection applied after each check.
using Projector = std::function<void(std::span<cplx>)>;

/// Normalized imaginary-time split-operator iteration
///   psi <- exp(-V dt/2) exp(-T dt) exp(-V dt/2) psi
/// Returns <H> evaluated spectrally on the final state, which is left
/// normalized to unit box norm in `state`. Throws ConvergenceError once a stage
/// exceeds max_steps.
RelaxationResult relax_in_box(const SpectralBox& box, std::span<const double> potential,
                              ComplexBuffer& state, const ImaginaryTimeConfig& cfg,
                              const Projector& project = {});

/// <H> = <T> + <V> for an arbitrary (not necessarily normalized) state.
double box_energy(const SpectralBox& box, std::span<const double> potential,
                  std::span<const double> kinetic, std::span<const cplx> state,
                  ComplexBuffer& scratch);

/// psi(z) <- (psi(z) + psi(-z)) / 2 on an n-point z grid centred as in GridSpec.
void project_parity_line(std::span<cplx> psi, int n);

/// Averages over exchange z1 <-> z2 and global parity on `slabs` consecutive
/// n x n planes.
void project_exchange_parity(std::span<cplx> psi, int n, std::size_t slabs = 1);

}  // namespace h2dyn

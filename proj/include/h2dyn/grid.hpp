#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "h2dyn/fft.hpp"

namespace h2dyn {

enum class Axis : int { R = 0, z1 = 1, z2 = 2 };
enum class Representation { coordinate, momentum };

/// Tensor grid over (R, z1, z2). Storage is row-major with R slowest and z2
/// fastest: index = (iR * nz + i1) * nz + i2.
///
/// R_j = (j + 1) dR, so the grid never touches R = 0.
/// z_i = -z_max + i dz.
/// Momentum grids follow FFT ordering: 0, dk, ..., (n/2 - 1) dk, -n/2 dk, ..., -dk.
struct GridSpec {
  int nR = 0;
  int nz = 0;
  double R_max = 0.0;
  double z_max = 0.0;
  double dR = 0.0;
  double dz = 0.0;
  std::vector<double> R_points;
  std::vector<double> z_points;
  std::vector<double> kR_points;
  std::vector<double> kz_points;

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(nR) * nz * nz;
  }
  std::size_t slab_size() const noexcept { return static_cast<std::size_t>(nz) * nz; }
  std::size_t index(int iR, int i1, int i2) const noexcept {
    return (static_cast<std::size_t>(iR) * nz + i1) * nz + i2;
  }
  double volume_element() const noexcept { return dR * dz * dz; }
  std::array<int, 3> dims() const noexcept { return {nR, nz, nz}; }
  double dkR() const noexcept;
  double dkz() const noexcept;

  /// Index of the grid point of -z, i.e. (nz - i) mod nz.
  int mirror(int i) const noexcept { return i == 0 ? 0 : nz - i; }
};

/// Throws ConfigError unless both counts are powers of two >= 8 and both
/// extents are positive.
GridSpec make_grid(int nR, int nz, double R_max, double z_max);

/// Angular wavenumbers of an n-point DFT with sample spacing `spacing`.
std::vector<double> fft_wavenumbers(int n, double spacing);

bool is_power_of_two(long n) noexcept;

class WaveFunction {
 public:
  explicit WaveFunction(GridSpec spec);
  explicit WaveFunction(std::shared_ptr<const GridSpec> spec);

  const GridSpec& spec() const noexcept { return *spec_; }
  const std::shared_ptr<const GridSpec>& spec_ptr() const noexcept { return spec_; }

  std::span<cplx> amps() noexcept { return amps_; }
  std::span<const cplx> amps() const noexcept { return amps_; }
  cplx* data() noexcept { return amps_.data(); }
  ComplexBuffer& storage() noexcept { return amps_; }
  const cplx* data() const noexcept { return amps_.data(); }

  cplx& operator()(int iR, int i1, int i2) noexcept { return amps_[spec_->index(iR, i1, i2)]; }
  const cplx& operator()(int iR, int i1, int i2) const noexcept {
    return amps_[spec_->index(iR, i1, i2)];
  }

  Representation representation(Axis a) const noexcept {
    return rep_[static_cast<int>(a)];
  }
  bool in_coordinate_space() const noexcept;
  void set_representation(Axis a, Representation r) noexcept { rep_[static_cast<int>(a)] = r; }

  /// Scales amplitudes so norm2() == 1. Throws DomainError on a zero state.
  void normalize();

 private:
  std::shared_ptr<const GridSpec> spec_;
  ComplexBuffer amps_;
  std::array<Representation, 3> rep_{Representation::coordinate, Representation::coordinate,
                                     Representation::coordinate};
};

/// Unitary transforms over the selected axes:
///   phi(k) = (1/sqrt(2 pi)) sum_j psi(x_j) exp(-i k x_j) dx
/// including the grid origin phase, so momentum amplitudes sample the
/// continuous Fourier transform. Throws UsageError if an axis is already in
/// the target representation.
WaveFunction to_momentum(WaveFunction wf, std::span<const Axis> axes);
WaveFunction to_coordinate(WaveFunction wf, std::span<const Axis> axes);

inline constexpr std::array<Axis, 3> all_axes{Axis::R, Axis::z1, Axis::z2};

/// Sum |amps|^2 times the cell measure of the current representation of each
/// axis (dR or dkR, dz or dkz). Fixed summation order.
double norm2(const WaveFunction& wf);

/// <a|b> over the coordinate grid.
cplx inner_product(const WaveFunction& a, const WaveFunction& b);

enum class Observable { R, z1, z2, z1_plus_z2 };

/// <O> = sum O |psi|^2 dV / norm2. Throws DomainError for a zero state and
/// UsageError outside coordinate space.
double expectation(const WaveFunction& wf, Observable o);

/// sum over the grid of f(slab) evaluated per R slab and added in slab order.
/// Partial sums are independent of how slabs are scheduled.
template <class F>
double slab_sum(int n_slabs, F&& per_slab) {
  std::vector<double> partial(static_cast<std::size_t>(n_slabs));
  for (int s = 0; s < n_slabs; ++s) partial[s] = per_slab(s);
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace h2dyn

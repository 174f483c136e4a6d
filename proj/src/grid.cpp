#include "h2dyn/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "h2dyn/error.hpp"

namespace h2dyn {

bool is_power_of_two(long n) noexcept { return n > 0 && (n & (n - 1)) == 0; }

std::vector<double> fft_wavenumbers(int n, double spacing) {
  std::vector<double> k(static_cast<std::size_t>(n));
  const double dk = 2.0 * std::numbers::pi / (n * spacing);
  for (int m = 0; m < n; ++m) k[m] = (m < n / 2 ? m : m - n) * dk;
  return k;
}

double GridSpec::dkR() const noexcept { return 2.0 * std::numbers::pi / (nR * dR); }
double GridSpec::dkz() const noexcept { return 2.0 * std::numbers::pi / (nz * dz); }

GridSpec make_grid(int nR, int nz, double R_max, double z_max) {
  if (nR < 8 || !is_power_of_two(nR))
    throw ConfigError("nR must be a power of two >= 8, got " + std::to_string(nR));
  if (nz < 8 || !is_power_of_two(nz))
    throw ConfigError("nz must be a power of two >= 8, got " + std::to_string(nz));
  if (!(R_max > 0.0)) throw ConfigError("R_max must be positive");
  if (!(z_max > 0.0)) throw ConfigError("z_max must be positive");

  GridSpec g;
  g.nR = nR;
  g.nz = nz;
  g.R_max = R_max;
  g.z_max = z_max;
  g.dR = R_max / nR;
  g.dz = 2.0 * z_max / nz;
  g.R_points.resize(nR);
  for (int j = 0; j < nR; ++j) g.R_points[j] = (j + 1) * g.dR;
  g.z_points.resize(nz);
  for (int i = 0; i < nz; ++i) g.z_points[i] = -z_max + i * g.dz;
  g.kR_points = fft_wavenumbers(nR, g.dR);
  g.kz_points = fft_wavenumbers(nz, g.dz);
  return g;
}

WaveFunction::WaveFunction(GridSpec spec)
    : WaveFunction(std::make_shared<const GridSpec>(std::move(spec))) {}

WaveFunction::WaveFunction(std::shared_ptr<const GridSpec> spec)
    : spec_(std::move(spec)), amps_(spec_->size(), cplx{0.0, 0.0}) {}

bool WaveFunction::in_coordinate_space() const noexcept {
  for (auto r : rep_)
    if (r != Representation::coordinate) return false;
  return true;
}

void WaveFunction::normalize() {
  const double n = norm2(*this);
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("cannot normalize a zero or non-finite state");
  const double s = 1.0 / std::sqrt(n);
  for (auto& a : amps_) a *= s;
}

namespace {

// Multiplies every element by factor[index along `axis`].
void scale_along_axis(std::span<cplx> data, const std::array<int, 3>& dims, int axis,
                      const std::vector<cplx>& factor) {
  const std::size_t n0 = dims[0], n1 = dims[1], n2 = dims[2];
  for (std::size_t a = 0; a < n0; ++a)
    for (std::size_t b = 0; b < n1; ++b) {
      cplx* line = data.data() + (a * n1 + b) * n2;
      for (std::size_t c = 0; c < n2; ++c) {
        const std::size_t idx = axis == 0 ? a : axis == 1 ? b : c;
        line[c] *= factor[idx];
      }
    }
}

struct AxisGeometry {
  double spacing;
  double origin;
  const std::vector<double>* k;
};

AxisGeometry geometry(const GridSpec& g, Axis a) {
  if (a == Axis::R) return {g.dR, g.R_points.front(), &g.kR_points};
  return {g.dz, g.z_points.front(), &g.kz_points};
}

WaveFunction transform(WaveFunction wf, std::span<const Axis> axes, bool forward) {
  const auto& g = wf.spec();
  const Representation from = forward ? Representation::coordinate : Representation::momentum;
  const Representation to = forward ? Representation::momentum : Representation::coordinate;
  std::vector<int> ax;
  for (Axis a : axes) {
    if (wf.representation(a) != from)
      throw UsageError(std::string("axis ") + std::to_string(static_cast<int>(a)) +
                       (forward ? " is already in momentum space"
                                : " is already in coordinate space"));
    ax.push_back(static_cast<int>(a));
  }
  if (ax.empty()) return wf;
  const auto dims = g.dims();
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

  if (!forward) {
    for (Axis a : axes) {
      const auto geo = geometry(g, a);
      std::vector<cplx> f(geo.k->size());
      for (std::size_t m = 0; m < f.size(); ++m) f[m] = std::polar(1.0, (*geo.k)[m] * geo.origin);
      scale_along_axis(wf.amps(), dims, static_cast<int>(a), f);
    }
  }
  cached_plan(dims, ax, forward ? FftDirection::forward : FftDirection::backward)
      .execute(wf.data());
  double scale = 1.0;
  for (Axis a : axes) {
    const auto geo = geometry(g, a);
    if (forward) {
      scale *= geo.spacing * inv_sqrt_2pi;
      std::vector<cplx> f(geo.k->size());
      for (std::size_t m = 0; m < f.size(); ++m) f[m] = std::polar(1.0, -(*geo.k)[m] * geo.origin);
      scale_along_axis(wf.amps(), dims, static_cast<int>(a), f);
    } else {
      const double dk = 2.0 * std::numbers::pi / (geo.k->size() * geo.spacing);
      scale *= dk * inv_sqrt_2pi;
    }
    wf.set_representation(a, to);
  }
  for (auto& v : wf.amps()) v *= scale;
  return wf;
}

}  // namespace

WaveFunction to_momentum(WaveFunction wf, std::span<const Axis> axes) {
  return transform(std::move(wf), axes, true);
}

WaveFunction to_coordinate(WaveFunction wf, std::span<const Axis> axes) {
  return transform(std::move(wf), axes, false);
}

double norm2(const WaveFunction& wf) {
  const auto& g = wf.spec();
  double measure = 1.0;
  measure *= wf.representation(Axis::R) == Representation::coordinate ? g.dR : g.dkR();
  measure *= wf.representation(Axis::z1) == Representation::coordinate ? g.dz : g.dkz();
  measure *= wf.representation(Axis::z2) == Representation::coordinate ? g.dz : g.dkz();
  const std::size_t slab = g.slab_size();
  const cplx* p = wf.data();
  return measure * slab_sum(g.nR, [&](int s) {
           double acc = 0.0;
           const cplx* q = p + s * slab;
           for (std::size_t i = 0; i < slab; ++i) acc += std::norm(q[i]);
           return acc;
         });
}

cplx inner_product(const WaveFunction& a, const WaveFunction& b) {
  if (!a.in_coordinate_space() || !b.in_coordinate_space())
    throw UsageError("inner_product requires coordinate representation");
  if (a.spec().size() != b.spec().size()) throw UsageError("inner_product on mismatched grids");
  const auto& g = a.spec();
  const std::size_t slab = g.slab_size();
  double re = 0.0, im = 0.0;
  for (int s = 0; s < g.nR; ++s) {
    cplx acc{0.0, 0.0};
    for (std::size_t i = s * slab; i < (s + 1) * slab; ++i) acc += std::conj(a.data()[i]) * b.data()[i];
    re += acc.real();
    im += acc.imag();
  }
  return cplx{re, im} * g.volume_element();
}

double expectation(const WaveFunction& wf, Observable o) {
  if (!wf.in_coordinate_space()) throw UsageError("expectation requires coordinate representation");
  const auto& g = wf.spec();
  const double n = norm2(wf);
  if (!(n > 0.0)) throw DomainError("expectation value of a zero-norm state");
  const std::size_t nz = g.nz;
  const double sum = slab_sum(g.nR, [&](int iR) {
    double acc = 0.0;
    const cplx* q = wf.data() + iR * g.slab_size();
    for (std::size_t i1 = 0; i1 < nz; ++i1)
      for (std::size_t i2 = 0; i2 < nz; ++i2) {
        double w = 0.0;
        switch (o) {
          case Observable::R: w = g.R_points[iR]; break;
          case Observable::z1: w = g.z_points[i1]; break;
          case Observable::z2: w = g.z_points[i2]; break;
          case Observable::z1_plus_z2: w = g.z_points[i1] + g.z_points[i2]; break;
        }
        acc += w * std::norm(q[i1 * nz + i2]);
      }
    return acc;
  });
  return sum * g.volume_element() / n;
}

}  // namespace h2dyn

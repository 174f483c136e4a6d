#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "h2dyn/error.hpp"
#include "h2dyn/grid.hpp"
#include "oracles.hpp"

using namespace h2dyn;

namespace {

WaveFunction random_state(const GridSpec& spec, unsigned seed) {
  WaveFunction wf(spec);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  for (auto& a : wf.amps()) a = {g(rng), g(rng)};
  wf.normalize();
  return wf;
}

double max_abs_diff(const WaveFunction& a, const WaveFunction& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.amps().size(); ++i) m = std::max(m, std::abs(a.amps()[i] - b.amps()[i]));
  return m;
}

}  // namespace

TEST(Grid, SpacingsAndPoints) {
  const auto g = make_grid(512, 512, 10.0, 100.0);
  EXPECT_DOUBLE_EQ(g.dR, 10.0 / 512);
  EXPECT_DOUBLE_EQ(g.dz, 200.0 / 512);
  EXPECT_NEAR(g.dkz(), 2.0 * std::numbers::pi / 200.0, 1e-15);

  const auto s = make_grid(8, 8, 1.0, 1.0);
  for (int j = 0; j < 8; ++j) EXPECT_DOUBLE_EQ(s.R_points[j], 0.125 * (j + 1));
  EXPECT_DOUBLE_EQ(s.z_points.front(), -1.0);
  EXPECT_DOUBLE_EQ(s.kz_points[4], -4 * s.dkz());
}

TEST(Grid, RejectsBadCountsAndExtents) {
  EXPECT_THROW(make_grid(100, 64, 8, 60), ConfigError);
  EXPECT_THROW(make_grid(64, 4, 8, 60), ConfigError);
  EXPECT_THROW(make_grid(64, 64, 0, 60), ConfigError);
  EXPECT_THROW(make_grid(64, 64, 8, -1), ConfigError);
}

TEST(Grid, IndexOrderIsRSlowestZ2Fastest) {
  const auto g = make_grid(8, 16, 4, 10);
  EXPECT_EQ(g.index(0, 0, 1), 1u);
  EXPECT_EQ(g.index(0, 1, 0), 16u);
  EXPECT_EQ(g.index(1, 0, 0), 256u);
  EXPECT_EQ(g.mirror(0), 0);
  EXPECT_EQ(g.mirror(3), 13);
  EXPECT_DOUBLE_EQ(g.z_points[g.mirror(3)], -g.z_points[3]);
}

TEST(Grid, NormOfGaussianAndZero) {
  const auto g = make_grid(64, 64, 8, 20);
  WaveFunction wf(g);
  for (int j = 0; j < g.nR; ++j)
    for (int a = 0; a < g.nz; ++a)
      for (int b = 0; b < g.nz; ++b) {
        const double R = g.R_points[j] - 4.0, z1 = g.z_points[a], z2 = g.z_points[b];
        wf(j, a, b) = std::exp(-(R * R / 0.5 + z1 * z1 / 4 + z2 * z2 / 4));
      }
  wf.normalize();
  EXPECT_NEAR(norm2(wf), 1.0, 1e-12);

  WaveFunction zero(g);
  EXPECT_EQ(norm2(zero), 0.0);
  EXPECT_THROW(zero.normalize(), DomainError);
}

TEST(Transform, PlaneWaveHasSingleBin) {
  const auto g = make_grid(8, 64, 4, 20);
  const int m = 5;
  const double k0 = m * g.dkz();
  WaveFunction wf(g);
  for (int j = 0; j < g.nR; ++j)
    for (int a = 0; a < g.nz; ++a)
      for (int b = 0; b < g.nz; ++b) wf(j, a, b) = std::exp(cplx(0, k0 * g.z_points[a]));
  const std::array axes{Axis::z1};
  const auto p = to_momentum(wf, axes);
  double peak = 0.0, rest = 0.0;
  for (int a = 0; a < g.nz; ++a) {
    const double v = std::abs(p(2, a, 7));
    (a == m ? peak : rest) += v;
  }
  EXPECT_GT(peak, 1.0);
  EXPECT_LT(rest, 1e-12 * peak);
}

TEST(Transform, RoundTripAndParsevalOnEveryAxisSubset) {
  const auto g = make_grid(16, 32, 6, 15);
  const auto wf = random_state(g, 7);
  const std::vector<std::vector<Axis>> subsets{{Axis::R},
                                               {Axis::z1},
                                               {Axis::z2},
                                               {Axis::R, Axis::z1},
                                               {Axis::z1, Axis::z2},
                                               {Axis::R, Axis::z2},
                                               {Axis::R, Axis::z1, Axis::z2}};
  for (const auto& s : subsets) {
    const auto p = to_momentum(wf, s);
    EXPECT_LT(std::abs(norm2(p) - 1.0), 1e-12);
    const auto back = to_coordinate(p, s);
    EXPECT_TRUE(back.in_coordinate_space());
    double err = 0.0;
    for (std::size_t i = 0; i < wf.amps().size(); ++i)
      err += std::norm(back.amps()[i] - wf.amps()[i]) * g.volume_element();
    EXPECT_LT(std::sqrt(err), 1e-12);
  }
}

TEST(Transform, DoubleTransformIsUsageError) {
  const auto g = make_grid(8, 8, 2, 4);
  const std::array axes{Axis::z2};
  auto p = to_momentum(random_state(g, 1), axes);
  EXPECT_THROW(to_momentum(p, axes), UsageError);
  EXPECT_THROW(to_coordinate(random_state(g, 2), axes), UsageError);
}

TEST(Transform, GaussianMatchesQuadratureOracle) {
  const auto g = make_grid(8, 128, 4, 20);
  const double sigma = 1.3, z0 = 0.8;
  auto f = [&](double z) { return std::exp(-(z - z0) * (z - z0) / (2 * sigma * sigma)); };
  WaveFunction wf(g);
  for (int j = 0; j < g.nR; ++j)
    for (int a = 0; a < g.nz; ++a)
      for (int b = 0; b < g.nz; ++b) wf(j, a, b) = f(g.z_points[a]) * (b == 64 ? 1.0 : 0.0);
  const std::array axes{Axis::z1};
  const auto p = to_momentum(wf, axes);
  double width_num = 0.0, width_den = 0.0;
  for (int a = 0; a < g.nz; ++a) {
    const double k = g.kz_points[a];
    const auto ref = oracle::fourier(f, k, -20.0, 20.0, 40000);
    EXPECT_LT(std::abs(p(3, a, 64) - ref), 1e-10) << "k=" << k;
    width_num += k * k * std::norm(p(3, a, 64));
    width_den += std::norm(p(3, a, 64));
  }
  // |phi(k)|^2 is Gaussian with standard deviation 1/(sqrt 2 sigma), i.e.
  // the amplitude has width 1/sigma.
  EXPECT_NEAR(std::sqrt(width_num / width_den), 1.0 / (std::sqrt(2.0) * sigma), 1e-10);
}

TEST(Expectation, SymmetryAndCentre) {
  const auto g = make_grid(64, 64, 8, 20);
  WaveFunction wf(g);
  for (int j = 0; j < g.nR; ++j)
    for (int a = 0; a < g.nz; ++a)
      for (int b = 0; b < g.nz; ++b) {
        const double R = g.R_points[j] - 3.0, z1 = g.z_points[a], z2 = g.z_points[b];
        wf(j, a, b) = std::exp(-R * R / 0.3) * (std::exp(-(z1 - 1) * (z1 - 1) - (z2 + 1) * (z2 + 1)) +
                                                std::exp(-(z1 + 1) * (z1 + 1) - (z2 - 1) * (z2 - 1)));
      }
  EXPECT_NEAR(expectation(wf, Observable::z1_plus_z2), 0.0, 1e-10);
  EXPECT_NEAR(expectation(wf, Observable::R), 3.0, g.dR);
  EXPECT_NEAR(expectation(wf, Observable::z1), 0.0, 1e-10);

  WaveFunction zero(g);
  EXPECT_THROW(expectation(zero, Observable::R), DomainError);
  const std::array axes{Axis::R};
  EXPECT_THROW(expectation(to_momentum(wf, axes), Observable::R), UsageError);
}

TEST(Reduction, DeterministicAcrossThreadCounts) {
  const auto g = make_grid(16, 32, 6, 15);
  const auto wf = random_state(g, 3);
  const std::array axes{Axis::R, Axis::z1, Axis::z2};
  const int before = fft_threads();
  set_fft_threads(1);
  const auto p1 = to_momentum(wf, axes);
  const double n1 = norm2(wf), e1 = expectation(wf, Observable::z1_plus_z2);
  set_fft_threads(2);
  const auto p2 = to_momentum(wf, axes);
  const double n2 = norm2(wf), e2 = expectation(wf, Observable::z1_plus_z2);
  set_fft_threads(before);
  EXPECT_EQ(n1, n2);
  EXPECT_EQ(e1, e2);
  EXPECT_LT(max_abs_diff(p1, p2), 1e-13);
}

TEST(InnerProduct, MatchesNorm) {
  const auto g = make_grid(8, 16, 4, 8);
  const auto a = random_state(g, 11);
  EXPECT_NEAR(inner_product(a, a).real(), 1.0, 1e-12);
  EXPECT_NEAR(inner_product(a, a).imag(), 0.0, 1e-14);
}

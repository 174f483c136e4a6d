#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "h2dyn/calibration.hpp"
#include "h2dyn/error.hpp"
#include "h2dyn/potential.hpp"
#include "oracles.hpp"
#include "testdirs.hpp"

using namespace h2dyn;

TEST(SoftCoulomb, DirectSubstitution) {
  EXPECT_NEAR(soft_coulomb(2, 0, 0, 1, 1), 0.5 + 1.0 - 4.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(soft_coulomb(2, 0, 0, 1, 1), -1.32843, 1e-5);
}

TEST(SoftCoulomb, ExchangeAndParitySymmetry) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> z(-30, 30), pos(0.2, 6);
  for (int i = 0; i < 1000; ++i) {
    const double R = pos(rng), a = pos(rng), b = pos(rng), z1 = z(rng), z2 = z(rng);
    const double v = soft_coulomb(R, z1, z2, a, b);
    EXPECT_EQ(v, soft_coulomb(R, z2, z1, a, b));
    EXPECT_NEAR(v, soft_coulomb(R, -z1, -z2, a, b), 1e-15);
    EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(SoftCoulomb, DistantElectronDecouples) {
  // With electron 1 far out, what remains beyond 1/R, the repulsion and the
  // two-centre well of electron 2 is the monopole attraction -2/z1 of the
  // distant electron, which vanishes as z1 grows.
  const double R = 2, a = 1, b = 1;
  for (double z1 : {50.0, 1e4}) {
    const double rest = 1.0 / R + 1.0 / std::sqrt(z1 * z1 + a * a) + electron_nuclear(R, 0.0, b);
    const double residual = soft_coulomb(R, z1, 0.0, a, b) - rest;
    EXPECT_NEAR(residual, -2.0 / z1, 1e-3);
    EXPECT_NEAR(residual, electron_nuclear(R, z1, b), 1e-14);
  }
  EXPECT_LT(std::abs(electron_nuclear(R, 1e4, b)), 1e-3);
}

TEST(SoftCoulomb, DomainErrors) {
  EXPECT_THROW(soft_coulomb(0, 0, 0, 1, 1), DomainError);
  EXPECT_THROW(soft_coulomb(1, 0, 0, -1, 1), DomainError);
  EXPECT_THROW(soft_coulomb(1, 0, 0, 1, 0), DomainError);
}

TEST(CubicSpline, ReproducesLinearDataAndClamps) {
  CubicSpline s({0, 1, 2.5, 4}, {1, 3, 6, 9});
  for (double x : {0.0, 0.3, 1.7, 3.9}) EXPECT_NEAR(s(x), 1 + 2 * x, 1e-14);
  EXPECT_DOUBLE_EQ(s(-5), 1.0);
  EXPECT_DOUBLE_EQ(s(10), 9.0);
  EXPECT_NEAR(s.derivative(2.0), 2.0, 1e-13);
}

TEST(SofteningTable, PositivityAndRoundTrip) {
  EXPECT_THROW(SofteningTable({1, 2, 3}, {1, -0.1, 1}, {1, 1, 1}), DomainError);
  SofteningTable t({1, 2, 3, 4}, {1.1, 1.2, 1.25, 1.27}, {0.9, 1.0, 1.05, 1.06});
  t.metadata = {"tolerance: 1e-05", "note"};
  EXPECT_DOUBLE_EQ(t.alpha(0.2), 1.1);
  EXPECT_DOUBLE_EQ(t.beta(9.0), 1.06);

  const auto path = test_tmp_dir("softening") / "table.dat";
  write_softening_table(path, t);
  const auto back = read_softening_table(path);
  EXPECT_EQ(back.knots(), t.knots());
  EXPECT_EQ(back.alpha_values(), t.alpha_values());
  EXPECT_EQ(back.beta_values(), t.beta_values());
  EXPECT_EQ(back.metadata, t.metadata);
  EXPECT_EQ(softening_digest(back), softening_digest(t));

  auto other = back;
  other.metadata.clear();
  EXPECT_EQ(softening_digest(other), softening_digest(t));
  EXPECT_NE(softening_digest(SofteningTable::constant(1, 1)), softening_digest(t));
}

TEST(ReferenceCurve, ParsingAndValidation) {
  const auto c = parse_reference_curve("# comment\n1 -1.0\n1.5 -1.17\n2 -1.13\n3 -1.05\n", CurveLabel::H2);
  EXPECT_EQ(c.R.size(), 4u);
  EXPECT_DOUBLE_EQ(c.at(1.5), -1.17);
  EXPECT_THROW(c.at(0.5), DomainError);
  EXPECT_THROW(parse_reference_curve("1 -1\n0.5 -1.1\n2 -1\n3 -1\n", CurveLabel::H2plus), IoError);
  EXPECT_THROW(parse_reference_curve("1 -1\n2 x\n", CurveLabel::H2plus), IoError);
  EXPECT_THROW(parse_reference_curve("1 -1\n2 -1.1\n", CurveLabel::H2plus), IoError);
  // Two minima.
  EXPECT_THROW(parse_reference_curve("1 -1\n2 -1.2\n3 -1.1\n4 -1.15\n5 -1.0\n", CurveLabel::H2), IoError);
  EXPECT_NO_THROW(parse_reference_curve("1 -1\n2 -1.2\n3 -1.1\n4 -1.15\n5 -1.0\n", CurveLabel::H2plus));
  EXPECT_THROW(read_reference_curve("/nonexistent/h2.dat", CurveLabel::H2), IoError);
}

TEST(ReferenceCurve, BundledCurvesCoverTheKnots) {
  const auto h2 = read_reference_curve(bundled_h2(), CurveLabel::H2);
  const auto h2p = read_reference_curve(bundled_h2plus(), CurveLabel::H2plus);
  EXPECT_EQ(h2.digest.size(), 64u);
  for (const auto* c : {&h2, &h2p}) {
    EXPECT_LE(c->min_R(), 0.5);
    EXPECT_GE(c->max_R(), 9.5);
  }
  // Both curves are bound near equilibrium and approach their dissociation
  // limits from below.
  EXPECT_NEAR(h2.at(1.4), -1.1745, 1e-3);
  EXPECT_NEAR(h2p.at(2.0), -0.6026, 1e-3);
  EXPECT_LT(h2.at(9.5), -0.99999);
  EXPECT_LT(h2p.at(9.5), -0.5);
}

namespace {

ReducedSolverConfig small_solver(int nz, double z_max) {
  ReducedSolverConfig c;
  c.nz = nz;
  c.z_max = z_max;
  c.itime.dt_schedule = {0.2, 0.05, 0.0125, 0.003125};
  c.itime.tolerance = 1e-13;
  return c;
}

}  // namespace

TEST(ReducedSolvers, LinePotentialMatchesDenseOracle) {
  const auto cfg = small_solver(64, 20);
  const double dz = 2 * cfg.z_max / cfg.nz;
  for (double R : {1.0, 2.0, 4.0}) {
    const auto v = h2plus_potential_line(R, 1.1, cfg);
    EXPECT_NEAR(h2plus_energy(R, 1.1, cfg), oracle::lowest_1d(v, dz), 1e-8) << "R=" << R;
  }
}

TEST(ReducedSolvers, PlanePotentialMatchesDenseOracle) {
  const auto cfg = small_solver(32, 12);
  const double dz = 2 * cfg.z_max / cfg.nz;
  for (double R : {1.4, 3.0}) {
    const auto v = h2_potential_plane(R, 1.2, 0.9, cfg);
    EXPECT_NEAR(h2_energy(R, 1.2, 0.9, cfg), oracle::lowest_2d(v, cfg.nz, dz), 1e-8) << "R=" << R;
  }
}

TEST(ReducedSolvers, HugeBetaLeavesElectronUnbound) {
  ReducedSolverConfig cfg;
  const double R = 2.0, beta = 1e3;
  const double e = h2plus_energy(R, beta, cfg);
  EXPECT_LT(e, 1.0 / R);
  EXPECT_GT(e, 1.0 / R - 2.5 / beta);
}

TEST(ReducedSolvers, MonotoneInSoftening) {
  // The bisection premises: energy rises with beta and falls with alpha.
  ReducedSolverConfig cfg;
  cfg.nz = 64;
  cfg.z_max = 30;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> r(0.5, 9.5);
  ComplexBuffer line, plane;
  for (int i = 0; i < 10; ++i) {
    const double R = r(rng);
    double prev = -1e300;
    for (double beta : {0.6, 0.9, 1.2, 1.6}) {
      const double e = h2plus_energy(R, beta, cfg, &line);
      EXPECT_GT(e, prev) << "R=" << R << " beta=" << beta;
      prev = e;
    }
    prev = 1e300;
    for (double alpha : {0.6, 1.2, 2.4}) {
      const double e = h2_energy(R, alpha, 1.0, cfg, &plane);
      EXPECT_LT(e, prev) << "R=" << R << " alpha=" << alpha;
      prev = e;
    }
  }
}

TEST(ReducedSolvers, VanishingRepulsionGivesTwiceTheOrbitalEnergy) {
  ReducedSolverConfig cfg;
  cfg.nz = 64;
  cfg.z_max = 30;
  cfg.itime.tolerance = 1e-13;
  for (double R : {1.4, 3.0}) {
    const double eps = h2plus_energy(R, 1.0, cfg) - 1.0 / R;
    EXPECT_NEAR(h2_energy(R, 1e7, 1.0, cfg), 2 * eps + 1.0 / R, 1e-6) << "R=" << R;
  }
}

TEST(Calibration, KnotsMatchReferencesAndVarySlowly) {
  const auto h2 = read_reference_curve(bundled_h2(), CurveLabel::H2);
  const auto h2p = read_reference_curve(bundled_h2plus(), CurveLabel::H2plus);
  CalibrationConfig cfg;
  cfg.knots = {1.25, 1.4, 1.5, 2.0};
  const auto res = calibrate(h2, h2p, cfg);
  ASSERT_EQ(res.knots.size(), 4u);
  EXPECT_LT(res.max_h2_residual(), cfg.tol);
  EXPECT_LT(res.max_h2plus_residual(), cfg.tol);
  EXPECT_LT(std::abs(res.knots[1].beta - res.knots[0].beta), 0.2);
  EXPECT_LT(std::abs(res.knots[2].beta - res.knots[1].beta), 0.2);

  // The calibrated H2+ energy near its minimum against the bundled value and
  // a dense diagonalization of the same Hamiltonian.
  const auto& k2 = res.knots[3];
  EXPECT_NEAR(h2plus_energy(2.0, res.table.beta(2.0), cfg.solver), h2p.at(2.0), 1e-4);
  const double dz = 2 * cfg.solver.z_max / cfg.solver.nz;
  EXPECT_NEAR(oracle::lowest_1d(h2plus_potential_line(2.0, k2.beta, cfg.solver), dz), k2.h2plus_model, 1e-8);

  // Ionization potential at R = 1.4 from the table.
  const double ip = h2_energy(1.4, res.table.alpha(1.4), res.table.beta(1.4), cfg.solver) -
                    h2plus_energy(1.4, res.table.beta(1.4), cfg.solver);
  EXPECT_NEAR(ip, h2.at(1.4) - h2p.at(1.4), 2 * cfg.tol);
}

TEST(Calibration, BracketFailureNamesTheKnot) {
  const auto h2 = read_reference_curve(bundled_h2(), CurveLabel::H2);
  const auto h2p = read_reference_curve(bundled_h2plus(), CurveLabel::H2plus);
  CalibrationConfig cfg;
  cfg.knots = {2.0};
  cfg.solver.nz = 64;
  cfg.solver.z_max = 30;
  cfg.beta_lo = 2.0;
  cfg.beta_hi = 3.0;
  try {
    calibrate(h2, h2p, cfg);
    FAIL() << "expected CalibrationError";
  } catch (const CalibrationError& e) {
    EXPECT_DOUBLE_EQ(e.knot(), 2.0);
  }
}

TEST(PotentialGrid, MatchesPointwiseAndIsSymmetric) {
  const auto g = make_grid(8, 32, 2.8, 12);  // R_3 = 1.4
  SofteningTable t({0.5, 1.5, 2.5, 3.5}, {1.0, 1.2, 1.3, 1.35}, {0.8, 0.95, 1.0, 1.02});
  const auto pot = eval_potential_grid(g, t);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> iR(0, g.nR - 1), iz(0, g.nz - 1);
  for (int n = 0; n < 100; ++n) {
    const int j = iR(rng), a = iz(rng), b = iz(rng);
    const double R = g.R_points[j];
    EXPECT_EQ(pot(j, a, b), soft_coulomb(R, g.z_points[a], g.z_points[b], t.alpha(R), t.beta(R)));
    EXPECT_EQ(pot(j, a, b), pot(j, b, a));
    // z = -z_max has no mirror point on the grid.
    if (a != 0 && b != 0) EXPECT_NEAR(pot(j, a, b), pot(j, g.mirror(a), g.mirror(b)), 1e-14);
  }

  ReducedSolverConfig cfg;
  cfg.nz = g.nz;
  cfg.z_max = g.z_max;
  ASSERT_DOUBLE_EQ(g.R_points[3], 1.4);
  const auto plane = h2_potential_plane(1.4, t.alpha(1.4), t.beta(1.4), cfg);
  double slab_min = 1e300;
  for (int a = 0; a < g.nz; ++a)
    for (int b = 0; b < g.nz; ++b) slab_min = std::min(slab_min, pot(3, a, b));
  EXPECT_EQ(slab_min, *std::min_element(plane.begin(), plane.end()));
}

#pragma once

#include <vector>

#include "h2dyn/potential.hpp"

namespace h2dyn {

struct CalibrationConfig {
  std::vector<double> knots;
  double tol = 1e-5;  // hartree
  double beta_lo = 0.3, beta_hi = 3.0;
  double alpha_lo = 0.3, alpha_hi = 5.0;
  int max_bisections = 80;
  int threads = 1;
  ReducedSolverConfig solver{};
};

/// 0.5, 0.75, ..., 9.5 bohr.
std::vector<double> default_knots();

struct KnotResult {
  double R = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double h2_model = 0.0, h2_ref = 0.0;
  double h2plus_model = 0.0, h2plus_ref = 0.0;
  int alpha_iterations = 0, beta_iterations = 0;

  double h2_residual() const { return h2_model - h2_ref; }
  double h2plus_residual() const { return h2plus_model - h2plus_ref; }
};

struct CalibrationResult {
  SofteningTable table;
  std::vector<KnotResult> knots;

  double max_h2_residual() const;
  double max_h2plus_residual() const;
};

/// Per knot: bisect beta until the H2+ model energy matches the reference
/// (energy rises with beta), then with beta fixed bisect alpha against the H2
/// reference (energy falls with alpha). Knots are independent and may run in
/// parallel; results are merged in knot order.
///
/// CalibrationError names the knot whose target lies outside a bracket.
CalibrationResult calibrate(const ReferenceCurve& h2_ref, const ReferenceCurve& h2plus_ref,
                            const CalibrationConfig& cfg);

/// Single-knot entry point used by calibrate().
KnotResult calibrate_knot(double R, const ReferenceCurve& h2_ref,
                          const ReferenceCurve& h2plus_ref, const CalibrationConfig& cfg,
                          ComplexBuffer* warm_line = nullptr,
                          ComplexBuffer* warm_plane = nullptr);

}  // namespace h2dyn

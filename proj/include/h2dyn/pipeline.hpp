#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include "h2dyn/config.hpp"

namespace h2dyn {

/// Progress sink for the stage drivers; nullptr-safe.
using Log = std::function<void(const std::string&)>;

struct StageOptions {
  bool resume = false;
  bool allow_digest_mismatch = false;
  Log log;
};

/// Stage digests used to skip unchanged stages in `pipeline`.
std::string calibrate_digest(const RunConfig& c);
std::string groundstate_digest(const RunConfig& c);
std::string propagate_digest(const RunConfig& c);

/// Writes the softening table and calibration_report.csv.
CalibrationResult run_calibrate(const RunConfig& c, const StageOptions& o = {});

struct GroundStateSummary {
  double energy = 0.0;
  double mean_R = 0.0;
  std::size_t steps = 0;
};

/// Relaxes on the run grid and writes the ground-state checkpoint plus
/// groundstate_report.txt and groundstate_history.csv.
GroundStateSummary run_groundstate(const RunConfig& c, const StageOptions& o = {});

struct PropagateSummary {
  std::size_t steps = 0;
  std::array<double, 3> P{};
  std::array<double, 3> absorbed{};
  double norm = 0.0;
};

/// Full run from the ground-state checkpoint: time series, P_k(R, t) maps,
/// snapshots, KER spectrum, absorber tally, then manifest.json.
PropagateSummary run_propagate(const RunConfig& c, const StageOptions& o = {});

/// Recomputes the KER with the alternative binning, extracts peaks, checks
/// conservation on the stored maps and writes analysis/summary.txt.
/// IncompleteRunError without a complete manifest.
void run_analyze(const std::filesystem::path& run_dir, const StageOptions& o = {});

/// calibrate -> groundstate -> propagate -> analyze, skipping stages whose
/// recorded digest matches.
void run_pipeline(const RunConfig& c, const StageOptions& o = {});

/// Normalized configuration as INI text; parse_config on it reproduces the
/// same digest.
std::string resolved_config_text(const RunConfig& c);

}  // namespace h2dyn

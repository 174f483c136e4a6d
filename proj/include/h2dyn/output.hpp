#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "h2dyn/digest.hpp"
#include "h2dyn/observables.hpp"

namespace h2dyn {

std::string code_version();

/// Header block carried by every output file ("# key: value" lines in text
/// files and sidecars).
struct RunMetadata {
  std::string label;
  Digest config_digest{};
  std::string table_digest;  // hex, empty when not applicable
  std::vector<std::pair<std::string, std::string>> extra;

  std::string header(std::string_view comment = "# ") const;
};

/// Fixed-format number used in every CSV: 16 significant digits, scientific.
std::string csv_number(double v);

struct TimeSeriesRow {
  double t_au = 0.0;
  double field_au = 0.0;
  std::array<double, 3> P{};
  double norm = 0.0;
  std::array<double, 3> absorbed{};
  double dipole = 0.0;  // <z1 + z2>
};

/// timeseries.csv: t_au, t_fs, field_au, P0, P1, P2, norm, absorbed_cum,
/// absorbed_G0, absorbed_G1, absorbed_G2, P1_plus_absorbed,
/// P2_plus_absorbed, dipole_z.
class TimeSeriesWriter {
 public:
  /// With `resume_t`, rows later than it are dropped and writing continues
  /// after the last kept row.
  TimeSeriesWriter(const std::filesystem::path& path, const RunMetadata& meta,
                   std::optional<double> resume_t = std::nullopt);
  void write(const TimeSeriesRow& row);
  void flush() { out_.flush(); }

  static const std::vector<std::string>& columns();

 private:
  std::ofstream out_;
};

struct TimeSeriesTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(std::string_view name) const;
};

TimeSeriesTable read_timeseries(const std::filesystem::path& path);

/// P_k(R, t) maps: for k = 0, 1, 2 a file P{k}_map.f64 of float64
/// little-endian rows (one per sample time, nR values each, density in R),
/// the sample times in P_map_times.csv, and a text sidecar P{k}_map.txt.
class NuclearMapWriter {
 public:
  NuclearMapWriter(const std::filesystem::path& dir, const std::vector<double>& R, const RunMetadata& meta,
                   std::optional<double> resume_t = std::nullopt);
  void write(double t, const std::array<NuclearDistribution, 3>& P);
  /// Rewrites the sidecars with the final row count.
  void finish();

 private:
  std::filesystem::path dir_;
  std::vector<double> R_;
  RunMetadata meta_;
  std::size_t rows_ = 0;
  std::array<std::ofstream, 3> bin_;
  std::ofstream times_;
};

struct NuclearMap {
  std::vector<double> R;
  std::vector<double> t;
  std::vector<std::vector<double>> rows;
};

NuclearMap read_nuclear_map(const std::filesystem::path& dir, int k);

/// E_eV is the bin centre.
void write_ker_csv(const std::filesystem::path& path, const KERSpectrum& s, const RunMetadata& meta);
KERSpectrum read_ker_csv(const std::filesystem::path& path);

/// tally.csv: R, absorbed_G0, absorbed_G1, absorbed_G2 (probabilities).
void write_tally_csv(const std::filesystem::path& path, const std::vector<double>& R, const AbsorbedTally& t,
                     const RunMetadata& meta);
AbsorbedTally read_tally_csv(const std::filesystem::path& path);

/// log10 density (floor 1e-12) as nz x nz float64 little-endian, z1 rows,
/// z2 fastest, with a text sidecar.
void write_snapshot(const std::filesystem::path& stem, const DensitySnapshot& s, const std::vector<double>& z,
                    const RunMetadata& meta);

/// manifest.json, written last. A run directory without a complete manifest
/// is not a valid run.
struct ManifestEntry {
  std::string path;  // relative to the run directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string label;
  std::string config_digest;
  std::string code_version;
  std::string started;
  std::string finished;
  std::string stage;
  std::vector<std::pair<std::string, std::string>> stage_digests;
  std::vector<ManifestEntry> files;
  bool complete = false;
};

void write_manifest(const std::filesystem::path& dir, RunManifest m, const std::vector<std::string>& files,
                    const std::string& name = "manifest.json");
/// IncompleteRunError when missing, malformed or incomplete, or when a listed
/// file is absent.
RunManifest read_manifest(const std::filesystem::path& dir, const std::string& name = "manifest.json");

std::string utc_timestamp();

}  // namespace h2dyn

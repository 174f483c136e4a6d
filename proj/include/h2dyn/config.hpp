#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "h2dyn/calibration.hpp"
#include "h2dyn/digest.hpp"
#include "h2dyn/laser.hpp"
#include "h2dyn/propagator.hpp"

namespace h2dyn {

/// Requested density snapshot: t in fs, nearest-R slice or, with a positive
/// half width, the slab [R - w, R + w].
struct SnapshotRequest {
  double t_fs = 0.0;
  double R = 1.4;
  double half_width = 0.0;
};

struct RunPaths {
  std::filesystem::path output_dir;
  std::filesystem::path softening_table;
  std::filesystem::path groundstate;
  std::filesystem::path h2_reference;
  std::filesystem::path h2plus_reference;
};

struct RunConfig {
  std::string label;
  int threads = 1;

  int nR = 128, nz = 128;
  double R_max = 8.0, z_max = 60.0;

  PulseInput pulse_input;
  PulseParams pulse;

  double dt_as = 1.0;
  double post_pulse_fs = 2.0;
  std::size_t observe_every = 10;
  std::size_t map_every = 50;
  std::size_t checkpoint_every = 0;
  double stability_limit = 1e-6;
  Masses masses;

  ImaginaryTimeConfig groundstate;
  double seed_R = 1.4, seed_z = 0.7;

  AbsorberSpec absorber;
  double z_A = 20.0;

  CalibrationConfig calibration;
  RunPaths paths;
  std::vector<SnapshotRequest> snapshots;

  double ker_bin_eV = 0.1;
  double alt_bin_eV = 0.05;

  /// Every schema key as "section.key = value" in schema order, numbers in
  /// shortest round-trip form. Stable across formatting of the source text.
  std::map<std::string, std::string> normalized;

  double dt() const noexcept;
  std::size_t n_steps() const;
  PropagationConfig propagation() const;
  GridSpec grid() const;

  /// Canonical text of the given sections (all when empty).
  std::string canonical(std::initializer_list<std::string_view> sections = {}) const;
  Digest digest() const;
};

/// Parses INI-style text:
///
///   # comment
///   [section]
///   key = value
///
/// Unknown sections or keys, duplicate keys, bad values and conflicting pulse
/// alternatives raise ParseError carrying the key and line (line 0 for
/// overrides). Overrides have the form "section.key=value" and are validated
/// like file entries. Relative paths resolve against `base_dir`.
RunConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {},
                       const std::filesystem::path& base_dir = {});

/// parse_config on a file; IoError if it cannot be read.
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// The documented example configuration with every key at its default.
std::string default_config_text();

}  // namespace h2dyn

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "h2dyn/digest.hpp"
#include "h2dyn/grid.hpp"
#include "h2dyn/laser.hpp"
#include "h2dyn/observables.hpp"

namespace h2dyn {

/// Binary checkpoint, all fields little-endian:
///
///   offset  size  field
///        0     4  magic "WPKT"
///        4     4  u32 version (1)
///        8     4  u32 nR
///       12     4  u32 nz
///       16     8  f64 R_max
///       24     8  f64 z_max
///       32     8  f64 dt
///       40     8  u64 step index
///       48     8  f64 time
///       56    40  f64 x5 pulse: omega, E0, tau, phi, t_start
///       96    32  softening table digest (SHA-256)
///      128    32  run configuration digest (SHA-256)
///      160     1  u8 tally present
///      161     7  reserved, zero
///      168         nR*nz*nz complex amplitudes (re, im f64), R slowest, z2 fastest
///                  then, if the tally is present, 3*nR f64 (region-major)
struct CheckpointHeader {
  std::uint32_t version = 1;
  std::uint32_t nR = 0, nz = 0;
  double R_max = 0.0, z_max = 0.0;
  double dt = 0.0;
  std::uint64_t step = 0;
  double time = 0.0;
  PulseParams pulse{};
  Digest table_digest{};
  Digest config_digest{};
  bool has_tally = false;
};

inline constexpr std::size_t checkpoint_header_bytes = 168;

struct Checkpoint {
  CheckpointHeader header;
  WaveFunction wf;
  AbsorbedTally tally;
};

/// Written to a temporary file and renamed, so a crash never leaves a partial
/// checkpoint under the final name.
void write_checkpoint(const std::filesystem::path& path, const CheckpointHeader& header,
                      const WaveFunction& wf, const AbsorbedTally* tally = nullptr);

/// IoError on bad magic, unknown version or a size that does not match the
/// header (truncation).
Checkpoint read_checkpoint(const std::filesystem::path& path);
CheckpointHeader read_checkpoint_header(const std::filesystem::path& path);

/// DigestMismatch unless the checkpoint was written by a run with this config
/// digest (and table digest, if given).
void require_matching(const CheckpointHeader& h, const Digest& config_digest,
                      const std::optional<Digest>& table_digest = std::nullopt);

}  // namespace h2dyn

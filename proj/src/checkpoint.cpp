#include "h2dyn/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "h2dyn/error.hpp"

namespace h2dyn {

namespace {

constexpr char magic[4] = {'W', 'P', 'K', 'T'};

template <class T>
void put(std::vector<char>& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.insert(out.end(), b, b + sizeof(T));
}

template <class T>
T get(const char* p) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

std::vector<char> encode_header(const CheckpointHeader& h) {
  std::vector<char> out;
  out.reserve(checkpoint_header_bytes);
  out.insert(out.end(), magic, magic + 4);
  put<std::uint32_t>(out, h.version);
  put<std::uint32_t>(out, h.nR);
  put<std::uint32_t>(out, h.nz);
  put<double>(out, h.R_max);
  put<double>(out, h.z_max);
  put<double>(out, h.dt);
  put<std::uint64_t>(out, h.step);
  put<double>(out, h.time);
  for (double v : {h.pulse.omega, h.pulse.E0, h.pulse.tau, h.pulse.phi, h.pulse.t_start}) put<double>(out, v);
  out.insert(out.end(), h.table_digest.begin(), h.table_digest.end());
  out.insert(out.end(), h.config_digest.begin(), h.config_digest.end());
  out.push_back(h.has_tally ? 1 : 0);
  out.resize(checkpoint_header_bytes, 0);
  return out;
}

CheckpointHeader decode_header(const char* p, const std::string& where) {
  if (std::memcmp(p, magic, 4) != 0) throw IoError(where + ": not a checkpoint (bad magic)");
  CheckpointHeader h;
  h.version = get<std::uint32_t>(p + 4);
  if (h.version != 1) throw IoError(where + ": unsupported checkpoint version " + std::to_string(h.version));
  h.nR = get<std::uint32_t>(p + 8);
  h.nz = get<std::uint32_t>(p + 12);
  h.R_max = get<double>(p + 16);
  h.z_max = get<double>(p + 24);
  h.dt = get<double>(p + 32);
  h.step = get<std::uint64_t>(p + 40);
  h.time = get<double>(p + 48);
  h.pulse.omega = get<double>(p + 56);
  h.pulse.E0 = get<double>(p + 64);
  h.pulse.tau = get<double>(p + 72);
  h.pulse.phi = get<double>(p + 80);
  h.pulse.t_start = get<double>(p + 88);
  std::memcpy(h.table_digest.data(), p + 96, 32);
  std::memcpy(h.config_digest.data(), p + 128, 32);
  h.has_tally = p[160] != 0;
  return h;
}

std::uintmax_t expected_size(const CheckpointHeader& h) {
  const std::uintmax_t points = static_cast<std::uintmax_t>(h.nR) * h.nz * h.nz;
  return checkpoint_header_bytes + points * 16 + (h.has_tally ? 3ull * h.nR * 8 : 0);
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const CheckpointHeader& header,
                      const WaveFunction& wf, const AbsorbedTally* tally) {
  if (!wf.in_coordinate_space()) throw UsageError("checkpoints store coordinate-space states");
  const auto& g = wf.spec();
  CheckpointHeader h = header;
  h.nR = static_cast<std::uint32_t>(g.nR);
  h.nz = static_cast<std::uint32_t>(g.nz);
  h.R_max = g.R_max;
  h.z_max = g.z_max;
  h.has_tally = tally != nullptr && tally->enabled;

  std::vector<char> buf = encode_header(h);
  buf.reserve(expected_size(h));
  for (const cplx& a : wf.amps()) {
    put<double>(buf, a.real());
    put<double>(buf, a.imag());
  }
  if (h.has_tally)
    for (const auto& row : tally->by_region) {
      if (row.size() != static_cast<std::size_t>(g.nR)) throw UsageError("tally does not match the grid");
      for (double v : row) put<double>(buf, v);
    }

  auto tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  char raw[checkpoint_header_bytes];
  in.read(raw, sizeof raw);
  if (in.gcount() != static_cast<std::streamsize>(sizeof raw))
    throw IoError(path.string() + ": truncated checkpoint header");
  return decode_header(raw, path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  const CheckpointHeader h = read_checkpoint_header(path);
  const auto size = std::filesystem::file_size(path);
  if (size != expected_size(h))
    throw IoError(path.string() + ": checkpoint is " + std::to_string(size) + " bytes, header implies " +
                  std::to_string(expected_size(h)) + " (truncated or corrupt)");
  std::ifstream in(path, std::ios::binary);
  std::vector<char> buf(size);
  in.read(buf.data(), static_cast<std::streamsize>(size));
  if (!in) throw IoError("read error on " + path.string());

  GridSpec spec = make_grid(static_cast<int>(h.nR), static_cast<int>(h.nz), h.R_max, h.z_max);
  WaveFunction wf(std::move(spec));
  const char* p = buf.data() + checkpoint_header_bytes;
  for (cplx& a : wf.amps()) {
    a = cplx(get<double>(p), get<double>(p + 8));
    p += 16;
  }
  AbsorbedTally tally = AbsorbedTally::zeros(static_cast<int>(h.nR), h.has_tally);
  if (h.has_tally)
    for (auto& row : tally.by_region)
      for (double& v : row) {
        v = get<double>(p);
        p += 8;
      }
  return Checkpoint{h, std::move(wf), std::move(tally)};
}

void require_matching(const CheckpointHeader& h, const Digest& config_digest,
                      const std::optional<Digest>& table_digest) {
  if (h.config_digest != config_digest)
    throw DigestMismatch("checkpoint was written with configuration " + to_hex(h.config_digest) +
                         ", current configuration is " + to_hex(config_digest));
  if (table_digest && h.table_digest != *table_digest)
    throw DigestMismatch("checkpoint was written with softening table " + to_hex(h.table_digest) +
                         ", current table is " + to_hex(*table_digest));
}

}  // namespace h2dyn

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace h2dyn {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::string_view bytes);
std::string sha256_hex(std::string_view bytes);
std::string sha256_file_hex(const std::filesystem::path& path);

std::string to_hex(const Digest& d);
/// Parses 64 hex characters; throws IoError otherwise.
Digest digest_from_hex(std::string_view hex);

}  // namespace h2dyn

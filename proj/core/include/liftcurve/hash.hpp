#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace liftcurve {

// Lowercase hex SHA-256 of a file's bytes. Throws IoError if unreadable.
std::string file_sha256(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);

// 64-bit FNV-1a; used for labeled seed derivation, not for integrity.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace liftcurve

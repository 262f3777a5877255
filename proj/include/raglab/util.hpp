#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace raglab::util {

/// FNV-1a 64-bit over a byte string.
std::uint64_t fnv1a(std::string_view bytes);

/// Derives an independent sub-seed from a base seed and a discriminator
/// (splitmix64 finalizer over the combined value).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);
std::uint64_t mix_seed(std::uint64_t seed, std::string_view discriminator);

/// FNV-1a of a file's contents as "fnv1a:<16 hex digits>".
std::string file_checksum(const std::filesystem::path& path);

/// Fixed-precision decimal formatting ("0.5642").
std::string format_fixed(double value, int digits);

}  // namespace raglab::util

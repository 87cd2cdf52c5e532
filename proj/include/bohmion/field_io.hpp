#pragma once

#include <cstdint>
#include <filesystem>

#include "bohmion/grid.hpp"

namespace bohmion {

inline constexpr std::uint32_t kSnapshotFormatVersion = 1;

/// Binary field snapshot, little-endian:
///   "BOHM" | u32 version | u64 n | f64 x_min | f64 x_max | f64 time |
///   n*n interleaved (re, im) f64 values, row-major (x1 is the row).
void write_field(const std::filesystem::path& path, const WaveField& field);
WaveField read_field(const std::filesystem::path& path);

} // namespace bohmion

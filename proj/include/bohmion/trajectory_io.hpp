#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "bohmion/bohm.hpp"

namespace bohmion {

/// Trajectory CSV: t, x1, v1, x2, v2, alive1, alive2, mode. The concatenated
/// form prepends a seed_id column.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory);
void write_trajectories_csv(const std::filesystem::path& path, std::span<const Trajectory> trajectories,
                            std::span<const std::size_t> seed_ids);

/// Reads either form back; with a seed_id column one trajectory per id is
/// returned in order of first appearance. Mode labels are not parsed back.
std::vector<Trajectory> read_trajectories_csv(const std::filesystem::path& path);

} // namespace bohmion

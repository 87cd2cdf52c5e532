#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bohmion/config.hpp"
#include "bohmion/ensemble.hpp"

namespace bohmion {

enum class Command { relax, propagate, trajectories, sweep, appendix_demo };

Command parse_command(const std::string& text);
std::string to_string(Command command);

struct FileRecord {
    std::string path;  ///< relative to the output directory
    std::string sha256;
    std::uintmax_t bytes = 0;
};

struct RunManifest {
    std::string command;
    std::map<std::string, std::string> config;
    std::string version;
    double wall_seconds = 0.0;
    std::vector<FileRecord> files;
};

/// Hex SHA-256 of a file's contents.
std::string sha256_file(const std::filesystem::path& path);

/// Runs one CLI command into config.output_dir. The manifest is written last;
/// on failure a failure.json with the partial inventory is left instead and
/// the error is rethrown.
RunManifest run_pipeline(const RunConfig& config, Command command);

/// Results of one (R, intensity) trajectory run written into `dir`. Resumes
/// from dir/checkpoint when it was written by the same configuration.
struct PointRun {
    EnsembleResult result;
    std::vector<std::filesystem::path> files;
    bool resumed = false;
    bool halted = false;  ///< stopped at halt_after, checkpoint kept, no outputs
};

PointRun run_trajectory_point(const RunConfig& config, double R, double intensity_w_cm2,
                              const std::filesystem::path& dir, const std::string& file_suffix = "",
                              std::optional<double> halt_after = std::nullopt);

/// Fingerprint of the settings a checkpoint depends on.
std::string config_fingerprint(const RunConfig& config, double R, double intensity_w_cm2);

} // namespace bohmion

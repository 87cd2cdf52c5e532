#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bohmion/bohm.hpp"
#include "bohmion/ensemble.hpp"
#include "bohmion/model.hpp"
#include "bohmion/propagator.hpp"

namespace bohmion {

enum class TrajectoryFiles { concatenated, per_seed };

/// Everything a CLI run needs. Times accept a trailing T (optical periods),
/// e.g. "6.2T".
struct RunConfig {
    std::optional<double> R;
    double alpha = 0.7;
    double p = 1.2375;

    double wavelength_nm = 1064.0;
    double intensity_w_cm2 = 1.7e14;
    double ramp_cycles = 5.0;
    RampShape ramp_shape = RampShape::linear;
    double t_end = 1000.0;

    double box_half_extent = 60.0;
    double spacing = 0.3;
    double dt = 0.02;
    bool absorber_on = true;
    double absorber_fraction = 0.2;
    double absorber_power = 8.0;

    std::size_t relax_states = 4;
    double relax_dt = 0.05;
    double relax_tolerance = 1e-10;
    std::size_t relax_max_iterations = 200000;

    ModeKind mode = ModeKind::full;
    std::optional<double> t_switch;
    std::optional<double> coulomb_off_after;

    SeedScheme seed_scheme = SeedScheme::deterministic_grid;
    std::size_t seed_stride = 4;
    double seed_cutoff = 1e-6;
    std::size_t mc_count = 2000;
    std::uint64_t rng_seed = 20140601;
    double tracking_limit = 48.0;
    double threshold = 15.0;
    double dead_band = 0.3;

    /// Seeds nearest to these points get full trajectory records.
    std::vector<Point> record_points;
    double record_interval = 1.0;
    TrajectoryFiles trajectory_files = TrajectoryFiles::concatenated;
    /// Times at which the field is projected onto the eigenstates.
    std::vector<double> projection_times;

    double snapshot_stride = 0.0;  ///< 0 means 0.05 optical periods
    std::size_t snapshot_csv_stride = 4;
    double checkpoint_interval = 0.0;  ///< 0 means one optical period

    std::vector<double> R_values;
    std::vector<double> intensities;

    std::filesystem::path output_dir = "out";

    /// Derived quantities, filled by load_config.
    double omega = 0.0;
    double E0 = 0.0;
    double period = 0.0;

    /// key = value lines in file order, for the manifest.
    std::vector<std::pair<std::string, std::string>> raw;
};

/// Parses a flat key = value file (# starts a comment). Parse errors carry the
/// line number; validation errors name the key. Throws Error{parse|validation|io}.
RunConfig load_config(const std::filesystem::path& path);

/// Same as load_config on in-memory text; `origin` is used in messages.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");

/// Range and consistency checks; `require_R` is false for sweeps that give R_values.
void validate_config(const RunConfig& config);

/// Model, pulse and run setup built from a validated config.
MolecularModel model_from(const RunConfig& config, double R);
LaserPulse pulse_from(const RunConfig& config, double intensity_w_cm2);
TrajectoryMode mode_from(const RunConfig& config);
RunSetup setup_from(const RunConfig& config, double R, double intensity_w_cm2);
SeedOptions seed_options_from(const RunConfig& config);
RelaxOptions relax_options_from(const RunConfig& config);

/// Effective key/value view including defaults and the derived block.
std::map<std::string, std::string> describe(const RunConfig& config);

} // namespace bohmion

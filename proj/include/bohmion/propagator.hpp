#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bohmion/grid.hpp"
#include "bohmion/model.hpp"
#include "bohmion/spectral.hpp"

namespace bohmion {

struct AbsorberOptions {
    bool enabled = true;
    double fraction = 0.2;  ///< outer fraction of each half-axis covered by the mask
    double power = 8.0;     ///< exponent of the cosine profile
};

struct PropagatorOptions {
    double dt = 0.02;
    AbsorberOptions absorber;
    /// Electron-electron repulsion is removed from the Hamiltonian for t >= this time.
    std::optional<double> coulomb_off_after;
};

/// 1D absorber profile: 1 inside, cos^power ramp to 0 over the outer fraction.
std::vector<double> absorber_profile(const Grid2D& grid, const AbsorberOptions& options);

/// Strang split-step Fourier propagator in the length gauge:
/// exp(-i V dt/2) exp(-i T dt) exp(-i V dt/2), V evaluated at mid-step.
class SplitStepPropagator {
public:
    SplitStepPropagator(const Grid2D& grid, const MolecularModel& model, const LaserPulse& pulse,
                        PropagatorOptions options);

    const Grid2D& grid() const noexcept { return grid_; }
    double dt() const noexcept { return options_.dt; }
    const MolecularModel& model() const noexcept { return model_; }
    const LaserPulse& pulse() const noexcept { return pulse_; }
    const PropagatorOptions& options() const noexcept { return options_; }

    /// Advances the field by one step in place (time += dt).
    void advance(WaveField& field) const;

    /// Functional form of advance().
    WaveField step(WaveField field) const;

private:
    const std::vector<Complex>& potential_table(double t) const;

    Grid2D grid_;
    MolecularModel model_;
    LaserPulse pulse_;
    PropagatorOptions options_;
    Spectral spectral_;
    std::vector<Complex> kinetic_;
    std::vector<Complex> static_phase_on_;
    std::vector<Complex> static_phase_off_;
    std::vector<double> mask_;
};

/// One real-time step with a freshly built propagator (absorber off).
WaveField step_real_time(WaveField field, const MolecularModel& model, const LaserPulse& pulse,
                         double dt);

/// Field-free eigenstates in the exchange-symmetric sector, ordered by energy.
struct EigenSet {
    std::vector<WaveField> states;
    std::vector<double> energies;
    std::size_t iterations = 0;
};

struct RelaxOptions {
    double dt = 0.05;
    double tolerance = 1e-10;          ///< max energy change per step at convergence
    std::size_t max_iterations = 200000;
    std::size_t check_interval = 10;   ///< steps between energy evaluations and subspace rotations
    /// Imaginary-time steps used after convergence to remove the splitting bias
    /// of the fixed point; each refinement stage divides dt by 4.
    std::size_t refinement_stages = 2;
};

/// Imaginary-time relaxation with Gram-Schmidt and Rayleigh-Ritz rotation.
/// Throws Error{non_convergence} when max_iterations is exhausted.
EigenSet relax_eigenstates(const Grid2D& grid, const MolecularModel& model, std::size_t count,
                           RelaxOptions options = {});

/// <psi|H|psi> / <psi|psi> for the field-free Hamiltonian.
double field_free_energy(const WaveField& field, const MolecularModel& model);

/// H psi for the field-free Hamiltonian, kinetic part spectral.
ComplexBuffer apply_field_free_hamiltonian(const Spectral& spectral, std::span<const double> potential,
                                           std::span<const Complex> psi);

/// Field-free potential sampled on the grid.
std::vector<double> potential_table(const Grid2D& grid, const MolecularModel& model);

struct Projection {
    std::vector<double> amplitudes;
    std::vector<double> phases;  ///< radians, relative to the ground-state component
};

/// Throws Error{grid_mismatch} when the field and the eigenstates live on different grids.
Projection project(const WaveField& field, const EigenSet& eigenset);

struct CurrentDensity {
    RealBuffer j1;
    RealBuffer j2;
};

/// j_i = Im(conj(psi) dpsi/dx_i), derivatives spectral.
CurrentDensity current_density(const WaveField& field);

struct SnapshotRecord {
    std::filesystem::path field_path;
    std::filesystem::path grid_csv_path;
    std::optional<std::filesystem::path> projection_path;
    std::optional<Projection> projection;
    double norm = 0.0;
};

/// Writes <stem>.bin, a downsampled <stem>_grid.csv (x1, x2, density, j1, j2)
/// and, iff an eigenset is given, <stem>_projection.csv.
SnapshotRecord snapshot(const WaveField& field, const EigenSet* eigenset,
                        const std::filesystem::path& stem, std::size_t csv_stride = 4);

void write_eigenset(const std::filesystem::path& dir, const EigenSet& set);
EigenSet read_eigenset(const std::filesystem::path& dir);

} // namespace bohmion

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bohmion/grid.hpp"
#include "bohmion/interpolation.hpp"
#include "bohmion/model.hpp"
#include "bohmion/spectral.hpp"

namespace bohmion {

// Atomic units.
inline constexpr double kHbar = 1.0;
inline constexpr double kElectronMass = 1.0;

struct Velocity {
    double v1 = 0.0;
    double v2 = 0.0;
};

struct NodeRegularization {
    /// Below this fraction of the peak density the velocity is not trusted.
    double relative_density = 1e-12;
    /// Speed cap (a.u.) applied to the velocity vector.
    double v_cap = 10.0;
};

/// psi and its spectral first derivatives at one instant: everything the
/// guidance equation needs.
class VelocityFrame {
public:
    struct Sample {
        Complex psi;
        Complex d1;
        Complex d2;
    };

    VelocityFrame() = default;
    VelocityFrame(const WaveField& field, const Spectral& spectral);

    const Grid2D& grid() const noexcept { return grid_; }
    double time() const noexcept { return time_; }
    double peak_density() const noexcept { return peak_density_; }
    std::span<const Complex> psi() const noexcept { return psi_; }
    std::span<const Complex> d1() const noexcept { return d1_; }
    std::span<const Complex> d2() const noexcept { return d2_; }

    Sample sample(const Stencil& stencil) const;
    /// Throws Error{out_of_bounds} outside the grid.
    Sample sample(Point point) const { return sample(make_stencil(grid_, point)); }

private:
    Grid2D grid_;
    double time_ = 0.0;
    double peak_density_ = 0.0;
    ComplexBuffer psi_;
    ComplexBuffer d1_;
    ComplexBuffer d2_;
};

/// v_i = Re(-i hbar dpsi_i / psi) / m; empty where |psi|^2 falls below the
/// node threshold.
std::optional<Velocity> guidance_velocity(const VelocityFrame::Sample& s, double peak_density,
                                          const NodeRegularization& reg);

/// Scales the velocity down to |v| <= v_cap.
Velocity cap_speed(Velocity v, double v_cap);

/// Bohmian velocity of the field at an off-grid point. At a node the velocity
/// is reported as zero and the event is logged.
Velocity bohm_velocity(const WaveField& field, Point point, const NodeRegularization& reg = {});

/// Quantum potential Q = -(hbar^2 / 2m) sum_i (d^2 A / dx_i^2) / A and its
/// force, from spectral derivatives of A = |psi|. Q and -grad Q are formed on
/// the nodes (the force from derivatives of A up to third order, which stay
/// smooth where Q itself does not) and then interpolated. Stencils that touch
/// a node below the density threshold fall back to ratios of interpolated
/// derivatives.
class QuantumPotentialFrame {
public:
    QuantumPotentialFrame() = default;
    QuantumPotentialFrame(const WaveField& field, const Spectral& spectral,
                          double relative_density = 1e-12);

    double time() const noexcept { return time_; }
    const Grid2D& grid() const noexcept { return grid_; }

    /// Throws Error{node_singularity} where |psi|^2 < relative_density * peak.
    double potential(Point point) const;
    Force2 force(Point point) const;

    /// Q on every node (0 where the density is below the node threshold).
    std::vector<double> potential_on_grid() const;

private:
    double checked_amplitude(const Stencil& s, Point point) const;

    Grid2D grid_;
    double time_ = 0.0;
    double threshold_ = 0.0;
    RealBuffer amplitude_;
    RealBuffer lap_;
    RealBuffer grad1_;
    RealBuffer grad2_;
    RealBuffer lap_grad1_;
    RealBuffer lap_grad2_;
    RealBuffer q_;   ///< NaN below the threshold
    RealBuffer f1_;
    RealBuffer f2_;
};

double quantum_potential(const WaveField& field, Point point);
Force2 quantum_force(const WaveField& field, Point point);

enum class ModeKind { full, coulomb_off_after, quantum_off_after };

struct TrajectoryMode {
    ModeKind kind = ModeKind::full;
    double t_switch = 0.0;

    static TrajectoryMode full() { return {}; }
    static TrajectoryMode coulomb_off(double t) { return {ModeKind::coulomb_off_after, t}; }
    static TrajectoryMode quantum_off(double t) { return {ModeKind::quantum_off_after, t}; }

    bool classical_at(double t) const { return kind == ModeKind::quantum_off_after && t >= t_switch; }
    void validate() const;
};

ModeKind parse_mode_kind(const std::string& text);
std::string to_string(ModeKind kind);
/// Label written to the trajectory CSV, e.g. "quantum_off_after(912.3)".
std::string mode_label(const TrajectoryMode& mode);

struct BohmianState {
    Point x;
    Velocity v;
    double time = 0.0;
    bool alive1 = true;
    bool alive2 = true;

    bool active() const noexcept { return alive1 && alive2; }
};

struct Trajectory {
    Point seed;
    TrajectoryMode mode;
    std::vector<BohmianState> samples;
};

struct TracerOptions {
    double dt = 0.02;
    /// Electrons beyond |x| > tracking_limit are marked not alive and frozen.
    double tracking_limit = 48.0;
    NodeRegularization regularization;
};

/// Counters for node regularization events, for logging.
struct TracerStats {
    std::size_t node_hits = 0;
    std::size_t capped = 0;
};

/// Seeds with zero initial velocity at time t0 (the guidance field of a real
/// ground state vanishes, matching the initial condition).
std::vector<BohmianState> seed_states(std::span<const Point> seeds, double t0);

/// Sets each active state's velocity from the guidance field of `frame`.
void refresh_velocities(std::span<BohmianState> states, const VelocityFrame& frame,
                        const TracerOptions& options);

/// One synchronous step from now.time() to next.time(). Velocity mode uses the
/// explicit midpoint rule with linear-in-time interpolation of the frames at
/// the half step; states under quantum_off after t_switch follow Newton's
/// equation with the classical force only (velocity Verlet). Afterwards each
/// state carries the guidance velocity at its new position.
TracerStats advance_trajectories(std::span<BohmianState> states, const VelocityFrame& now,
                                 const VelocityFrame& next, const MolecularModel& model,
                                 const LaserPulse& pulse, const TrajectoryMode& mode,
                                 const TracerOptions& options);

/// Velocity-Verlet step of the full equation of motion with classical plus
/// quantum force.
void advance_force_mode(std::span<BohmianState> states, const QuantumPotentialFrame& now,
                        const QuantumPotentialFrame& next, const MolecularModel& model,
                        const LaserPulse& pulse, const TracerOptions& options);

namespace serial {

TracerStats advance_trajectories(std::span<BohmianState> states, const VelocityFrame& now,
                                 const VelocityFrame& next, const MolecularModel& model,
                                 const LaserPulse& pulse, const TrajectoryMode& mode,
                                 const TracerOptions& options);

} // namespace serial

/// Minimum over the record of (x2 - x1), oriented so that a positive value
/// means the initial ordering of the two electrons was never violated.
double check_non_crossing(const Trajectory& trajectory);

} // namespace bohmion

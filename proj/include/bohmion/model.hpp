#pragma once

#include <optional>
#include <string>

namespace bohmion {

/// Soft-core 1D H2: two electrons, protons fixed at +-R/2 (atomic units).
struct MolecularModel {
    double R = 0.0;
    double alpha = 0.7;   ///< electron-nucleus softening (a.u.^2)
    double p = 1.2375;    ///< electron-electron softening (a.u.^2)
    bool interelectronic_on = true;

    /// Throws Error{validation} for alpha <= 0, p <= 0 or R < 0.
    void validate() const;
};

enum class RampShape { linear, sin2 };

RampShape parse_ramp_shape(const std::string& text);
std::string to_string(RampShape shape);

/// Photon energy in a.u. for a wavelength in nm (45.5633... / lambda).
double omega_from_wavelength_nm(double wavelength_nm);

/// Peak field in a.u. for a cycle-averaged intensity in W/cm^2.
double field_from_intensity(double intensity_w_cm2);

/// E(t) = E0 f(t) sin(omega t), f ramping from 0 to 1 over ramp_cycles
/// periods and then constant.
struct LaserPulse {
    double omega = 0.0;
    double E0 = 0.0;
    double ramp_cycles = 5.0;
    RampShape ramp = RampShape::linear;
    double t_end = 1000.0;

    static LaserPulse from_lab(double wavelength_nm, double intensity_w_cm2,
                               double ramp_cycles = 5.0, RampShape ramp = RampShape::linear,
                               double t_end = 1000.0);
    /// A pulse with E0 = 0 (field-free runs).
    static LaserPulse off(double omega = 0.042823, double t_end = 1000.0);

    double period() const;
    double envelope(double t) const;
    double field(double t) const;

    /// 1-based optical cycle containing t, counted between the rising zero
    /// crossings of the carrier (cycle n spans [(n-1)T, nT)).
    int cycle_index(double t) const;

    void validate() const;
};

struct Force2 {
    double f1 = 0.0;
    double f2 = 0.0;
};

/// -1/sqrt((x - R/2)^2 + alpha) - 1/sqrt((x + R/2)^2 + alpha)
double nuclear_potential(const MolecularModel& model, double x);
double nuclear_force(const MolecularModel& model, double x);

double interelectronic_potential(const MolecularModel& model, double x1, double x2);

/// Field-free potential of both electrons.
double softcore_potential(const MolecularModel& model, double x1, double x2);

double laser_field(const LaserPulse& pulse, double t);

/// softcore_potential + E(t) (x1 + x2), the length-gauge potential.
double total_potential(const MolecularModel& model, const LaserPulse& pulse, double x1, double x2,
                       double t);

/// -grad total_potential, analytic.
Force2 classical_force(const MolecularModel& model, const LaserPulse& pulse, double x1, double x2,
                       double t);

/// The model in effect at time t when the electron-electron term is switched
/// off from `coulomb_off_after` onward.
MolecularModel model_at(const MolecularModel& model, std::optional<double> coulomb_off_after,
                        double t);

} // namespace bohmion

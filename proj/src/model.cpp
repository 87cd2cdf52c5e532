#include "bohmion/model.hpp"

#include <cmath>
#include <numbers>

#include "bohmion/error.hpp"

namespace bohmion {

namespace {

// Hartree energy times wavelength: hc / E_h in eV nm / eV.
constexpr double kHcOverHartreeNm = 1239.841984 / 27.211386245988;
// Intensity corresponding to a field of 1 a.u. (W/cm^2).
constexpr double kAtomicIntensity = 3.50944758e16;

} // namespace

void MolecularModel::validate() const {
    if (!(alpha > 0.0)) {
        throw Error(ErrorKind::validation, "alpha must be positive");
    }
    if (!(p > 0.0)) {
        throw Error(ErrorKind::validation, "p must be positive");
    }
    if (!(R >= 0.0)) {
        throw Error(ErrorKind::validation, "R must be non-negative");
    }
}

RampShape parse_ramp_shape(const std::string& text) {
    if (text == "linear") {
        return RampShape::linear;
    }
    if (text == "sin2") {
        return RampShape::sin2;
    }
    throw Error(ErrorKind::validation, "ramp_shape must be linear or sin2, got '" + text + "'");
}

std::string to_string(RampShape shape) { return shape == RampShape::linear ? "linear" : "sin2"; }

double omega_from_wavelength_nm(double wavelength_nm) { return kHcOverHartreeNm / wavelength_nm; }

double field_from_intensity(double intensity_w_cm2) {
    return std::sqrt(intensity_w_cm2 / kAtomicIntensity);
}

LaserPulse LaserPulse::from_lab(double wavelength_nm, double intensity_w_cm2, double ramp_cycles,
                                RampShape ramp, double t_end) {
    LaserPulse pulse;
    pulse.omega = omega_from_wavelength_nm(wavelength_nm);
    pulse.E0 = field_from_intensity(intensity_w_cm2);
    pulse.ramp_cycles = ramp_cycles;
    pulse.ramp = ramp;
    pulse.t_end = t_end;
    pulse.validate();
    return pulse;
}

LaserPulse LaserPulse::off(double omega, double t_end) {
    LaserPulse pulse;
    pulse.omega = omega;
    pulse.E0 = 0.0;
    pulse.t_end = t_end;
    return pulse;
}

void LaserPulse::validate() const {
    if (!(omega > 0.0)) {
        throw Error(ErrorKind::validation, "omega must be positive");
    }
    if (!(E0 >= 0.0)) {
        throw Error(ErrorKind::validation, "E0 must be non-negative");
    }
    if (!(ramp_cycles >= 0.0)) {
        throw Error(ErrorKind::validation, "ramp_cycles must be non-negative");
    }
    if (!(t_end > 0.0)) {
        throw Error(ErrorKind::validation, "t_end must be positive");
    }
}

double LaserPulse::period() const { return 2.0 * std::numbers::pi / omega; }

double LaserPulse::envelope(double t) const {
    if (t <= 0.0) {
        return 0.0;
    }
    const double ramp_time = ramp_cycles * period();
    if (t >= ramp_time) {
        return 1.0;
    }
    const double s = t / ramp_time;
    if (ramp == RampShape::linear) {
        return s;
    }
    const double q = std::sin(0.5 * std::numbers::pi * s);
    return q * q;
}

double LaserPulse::field(double t) const { return E0 * envelope(t) * std::sin(omega * t); }

int LaserPulse::cycle_index(double t) const {
    return static_cast<int>(std::floor(omega * t / (2.0 * std::numbers::pi))) + 1;
}

double nuclear_potential(const MolecularModel& model, double x) {
    const double a = x - 0.5 * model.R;
    const double b = x + 0.5 * model.R;
    return -1.0 / std::sqrt(a * a + model.alpha) - 1.0 / std::sqrt(b * b + model.alpha);
}

double nuclear_force(const MolecularModel& model, double x) {
    const auto term = [&](double d) {
        const double s = d * d + model.alpha;
        return -d / (s * std::sqrt(s));
    };
    return term(x - 0.5 * model.R) + term(x + 0.5 * model.R);
}

double interelectronic_potential(const MolecularModel& model, double x1, double x2) {
    if (!model.interelectronic_on) {
        return 0.0;
    }
    const double d = x1 - x2;
    return 1.0 / std::sqrt(d * d + model.p);
}

double softcore_potential(const MolecularModel& model, double x1, double x2) {
    return nuclear_potential(model, x1) + nuclear_potential(model, x2) +
           interelectronic_potential(model, x1, x2);
}

double laser_field(const LaserPulse& pulse, double t) { return pulse.field(t); }

double total_potential(const MolecularModel& model, const LaserPulse& pulse, double x1, double x2,
                       double t) {
    return softcore_potential(model, x1, x2) + laser_field(pulse, t) * (x1 + x2);
}

Force2 classical_force(const MolecularModel& model, const LaserPulse& pulse, double x1, double x2,
                       double t) {
    const double e = laser_field(pulse, t);
    Force2 f{nuclear_force(model, x1) - e, nuclear_force(model, x2) - e};
    if (model.interelectronic_on) {
        const double d = x1 - x2;
        const double s = d * d + model.p;
        const double repulsion = d / (s * std::sqrt(s));
        f.f1 += repulsion;
        f.f2 -= repulsion;
    }
    return f;
}

MolecularModel model_at(const MolecularModel& model, std::optional<double> coulomb_off_after,
                        double t) {
    MolecularModel m = model;
    if (coulomb_off_after && t >= *coulomb_off_after) {
        m.interelectronic_on = false;
    }
    return m;
}

} // namespace bohmion

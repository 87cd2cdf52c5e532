#include "bohmion/bohm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include <spdlog/spdlog.h>

#include "bohmion/error.hpp"
#include "bohmion/kernels.hpp"

namespace bohmion {

namespace {

double peak_of(std::span<const Complex> psi) {
    double peak = 0.0;
    for (const Complex z : psi) {
        peak = std::max(peak, std::norm(z));
    }
    return peak;
}

// Inverse transform of a spectrum multiplied by factor(i1, i2).
template <class F>
RealBuffer filtered_real(const ComplexBuffer& spectrum, const Spectral& spectral, F&& factor) {
    const std::size_t n = spectral.grid().n();
    const double scale = 1.0 / static_cast<double>(n * n);
    ComplexBuffer work(spectrum.size());
    for (std::size_t i1 = 0; i1 < n; ++i1) {
        for (std::size_t i2 = 0; i2 < n; ++i2) {
            work[i1 * n + i2] = spectrum[i1 * n + i2] * factor(i1, i2) * scale;
        }
    }
    spectral.inverse(work);
    RealBuffer out(work.size());
    for (std::size_t i = 0; i < work.size(); ++i) {
        out[i] = work[i].real();
    }
    return out;
}

bool outside(double x, double limit) { return std::abs(x) > limit; }

// Marks electrons past the tracking limit; returns true when the pair stops.
bool update_alive(BohmianState& s, double limit) {
    if (outside(s.x.x1, limit)) {
        s.alive1 = false;
    }
    if (outside(s.x.x2, limit)) {
        s.alive2 = false;
    }
    return !s.active();
}

void classical_step(BohmianState& s, double t, double dt, const MolecularModel& model,
                    const LaserPulse& pulse, double limit) {
    const Force2 f0 = classical_force(model, pulse, s.x.x1, s.x.x2, t);
    const double inv_m = 1.0 / kElectronMass;
    Point x{s.x.x1 + dt * s.v.v1 + 0.5 * dt * dt * f0.f1 * inv_m,
            s.x.x2 + dt * s.v.v2 + 0.5 * dt * dt * f0.f2 * inv_m};
    const Force2 f1 = classical_force(model, pulse, x.x1, x.x2, t + dt);
    s.v.v1 += 0.5 * dt * (f0.f1 + f1.f1) * inv_m;
    s.v.v2 += 0.5 * dt * (f0.f2 + f1.f2) * inv_m;
    s.x = x;
    s.time = t + dt;
    update_alive(s, limit);
}

// One tracer update; shared verbatim by the OpenMP and serial drivers.
void step_state(BohmianState& s, const VelocityFrame& now, const VelocityFrame& next,
                const MolecularModel& model, const LaserPulse& pulse, const TrajectoryMode& mode,
                const TracerOptions& options, TracerStats& stats) {
    if (!s.active()) {
        return;
    }
    const double t = now.time();
    const double dt = next.time() - now.time();
    if (mode.classical_at(t)) {
        classical_step(s, t, dt, model, pulse, options.tracking_limit);
        return;
    }
    const Grid2D& grid = now.grid();
    const Point half{s.x.x1 + 0.5 * dt * s.v.v1, s.x.x2 + 0.5 * dt * s.v.v2};
    if (!grid.covers(half)) {
        s.alive1 = grid.covers(half.x1);
        s.alive2 = grid.covers(half.x2);
        return;
    }
    const Stencil st = make_stencil(grid, half);
    const auto a = now.sample(st);
    const auto b = next.sample(st);
    const VelocityFrame::Sample mid{0.5 * (a.psi + b.psi), 0.5 * (a.d1 + b.d1), 0.5 * (a.d2 + b.d2)};
    const double mid_peak = 0.5 * (now.peak_density() + next.peak_density());
    Velocity v_mid = s.v;
    if (auto v = guidance_velocity(mid, mid_peak, options.regularization)) {
        v_mid = *v;
    } else {
        ++stats.node_hits;
    }
    const Velocity capped = cap_speed(v_mid, options.regularization.v_cap);
    if (capped.v1 != v_mid.v1 || capped.v2 != v_mid.v2) {
        ++stats.capped;
    }
    v_mid = capped;

    s.x = Point{s.x.x1 + dt * v_mid.v1, s.x.x2 + dt * v_mid.v2};
    s.time = next.time();
    s.v = v_mid;
    if (update_alive(s, options.tracking_limit) || !grid.covers(s.x)) {
        s.alive1 = s.alive1 && grid.covers(s.x.x1);
        s.alive2 = s.alive2 && grid.covers(s.x.x2);
        return;
    }
    if (auto v = guidance_velocity(next.sample(s.x), next.peak_density(), options.regularization)) {
        s.v = cap_speed(*v, options.regularization.v_cap);
    } else {
        ++stats.node_hits;
    }
}

void log_stats(const TracerStats& stats, double t) {
    if (stats.node_hits > 0 || stats.capped > 0) {
        spdlog::debug("t = {:.2f}: {} node regularizations, {} speed caps", t, stats.node_hits,
                      stats.capped);
    }
}

} // namespace

VelocityFrame::VelocityFrame(const WaveField& field, const Spectral& spectral)
    : grid_(field.grid()), time_(field.time()), psi_(field.buffer()) {
    if (!(spectral.grid() == grid_)) {
        throw Error(ErrorKind::grid_mismatch, "spectral workspace built for another grid");
    }
    spectral.gradient(psi_, d1_, d2_);
    peak_density_ = peak_of(psi_);
}

VelocityFrame::Sample VelocityFrame::sample(const Stencil& stencil) const {
    return {stencil.apply<Complex>(psi_), stencil.apply<Complex>(d1_), stencil.apply<Complex>(d2_)};
}

std::optional<Velocity> guidance_velocity(const VelocityFrame::Sample& s, double peak_density,
                                          const NodeRegularization& reg) {
    const double rho = std::norm(s.psi);
    if (!(rho > reg.relative_density * peak_density) || rho == 0.0) {
        return std::nullopt;
    }
    // Re(-i hbar d psi / psi) = hbar Im(d psi / psi) = hbar Im(conj(psi) d psi) / |psi|^2
    const double scale = kHbar / (kElectronMass * rho);
    return Velocity{(std::conj(s.psi) * s.d1).imag() * scale, (std::conj(s.psi) * s.d2).imag() * scale};
}

Velocity cap_speed(Velocity v, double v_cap) {
    const double speed = std::hypot(v.v1, v.v2);
    if (speed > v_cap && speed > 0.0) {
        const double s = v_cap / speed;
        return {v.v1 * s, v.v2 * s};
    }
    return v;
}

Velocity bohm_velocity(const WaveField& field, Point point, const NodeRegularization& reg) {
    warn_if_edge_mass(field);
    const Spectral spectral(field.grid());
    const VelocityFrame frame(field, spectral);
    const auto v = guidance_velocity(frame.sample(point), frame.peak_density(), reg);
    if (!v) {
        spdlog::debug("bohm_velocity: node at ({}, {}), reporting zero velocity", point.x1, point.x2);
        return {};
    }
    return cap_speed(*v, reg.v_cap);
}

QuantumPotentialFrame::QuantumPotentialFrame(const WaveField& field, const Spectral& spectral,
                                             double relative_density)
    : grid_(field.grid()), time_(field.time()) {
    const std::size_t n = grid_.n();
    ComplexBuffer a(grid_.size());
    amplitude_.resize(grid_.size());
    double peak = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        amplitude_[i] = std::abs(field.values()[i]);
        a[i] = amplitude_[i];
        peak = std::max(peak, amplitude_[i] * amplitude_[i]);
    }
    threshold_ = relative_density * peak;
    spectral.forward(a);
    const auto k = spectral.wavenumbers();
    const auto odd_k = [&](std::size_t j) { return j == n / 2 ? 0.0 : k[j]; };
    const auto k2 = [&](std::size_t i1, std::size_t i2) { return k[i1] * k[i1] + k[i2] * k[i2]; };
    const Complex i_unit(0.0, 1.0);
    lap_ = filtered_real(a, spectral, [&](std::size_t i1, std::size_t i2) { return Complex(-k2(i1, i2)); });
    grad1_ = filtered_real(a, spectral, [&](std::size_t i1, std::size_t) { return i_unit * odd_k(i1); });
    grad2_ = filtered_real(a, spectral, [&](std::size_t, std::size_t i2) { return i_unit * odd_k(i2); });
    lap_grad1_ = filtered_real(a, spectral, [&](std::size_t i1, std::size_t i2) {
        return -i_unit * odd_k(i1) * k2(i1, i2);
    });
    lap_grad2_ = filtered_real(a, spectral, [&](std::size_t i1, std::size_t i2) {
        return -i_unit * odd_k(i2) * k2(i1, i2);
    });

    const double c = 0.5 * kHbar * kHbar / kElectronMass;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    q_.assign(grid_.size(), nan);
    f1_.assign(grid_.size(), nan);
    f2_.assign(grid_.size(), nan);
    for (std::size_t i = 0; i < q_.size(); ++i) {
        const double amp = amplitude_[i];
        if (amp > 0.0 && amp * amp >= threshold_) {
            q_[i] = -c * lap_[i] / amp;
            f1_[i] = c * (lap_grad1_[i] / amp - lap_[i] * grad1_[i] / (amp * amp));
            f2_[i] = c * (lap_grad2_[i] / amp - lap_[i] * grad2_[i] / (amp * amp));
        }
    }
}

double QuantumPotentialFrame::checked_amplitude(const Stencil& s, Point point) const {
    const double a = s.apply<double>(amplitude_);
    if (!(a * a >= threshold_) || a <= 0.0) {
        std::ostringstream msg;
        msg << "quantum potential undefined at node (" << point.x1 << ", " << point.x2 << ")";
        throw Error(ErrorKind::node_singularity, msg.str());
    }
    return a;
}

double QuantumPotentialFrame::potential(Point point) const {
    const Stencil s = make_stencil(grid_, point);
    const double a = checked_amplitude(s, point);
    const double q = s.apply<double>(q_);
    if (std::isfinite(q)) {
        return q;
    }
    return -0.5 * kHbar * kHbar / kElectronMass * s.apply<double>(lap_) / a;
}

Force2 QuantumPotentialFrame::force(Point point) const {
    const Stencil s = make_stencil(grid_, point);
    const double a = checked_amplitude(s, point);
    const Force2 f{s.apply<double>(f1_), s.apply<double>(f2_)};
    if (std::isfinite(f.f1) && std::isfinite(f.f2)) {
        return f;
    }
    const double lap = s.apply<double>(lap_);
    const double c = 0.5 * kHbar * kHbar / kElectronMass;
    // -dQ/dx_i = c (d_i lap A / A - lap A d_i A / A^2)
    return {c * (s.apply<double>(lap_grad1_) / a - lap * s.apply<double>(grad1_) / (a * a)),
            c * (s.apply<double>(lap_grad2_) / a - lap * s.apply<double>(grad2_) / (a * a))};
}

std::vector<double> QuantumPotentialFrame::potential_on_grid() const {
    std::vector<double> q(amplitude_.size(), 0.0);
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (std::isfinite(q_[i])) {
            q[i] = q_[i];
        }
    }
    return q;
}

double quantum_potential(const WaveField& field, Point point) {
    const Spectral spectral(field.grid());
    return QuantumPotentialFrame(field, spectral).potential(point);
}

Force2 quantum_force(const WaveField& field, Point point) {
    const Spectral spectral(field.grid());
    return QuantumPotentialFrame(field, spectral).force(point);
}

void TrajectoryMode::validate() const {
    if (kind != ModeKind::full && !(t_switch >= 0.0)) {
        throw Error(ErrorKind::validation, "t_switch must be >= 0 for ablation modes");
    }
}

ModeKind parse_mode_kind(const std::string& text) {
    if (text == "full") {
        return ModeKind::full;
    }
    if (text == "coulomb_off_after") {
        return ModeKind::coulomb_off_after;
    }
    if (text == "quantum_off_after") {
        return ModeKind::quantum_off_after;
    }
    throw Error(ErrorKind::validation,
                "mode must be full, coulomb_off_after or quantum_off_after, got '" + text + "'");
}

std::string to_string(ModeKind kind) {
    switch (kind) {
    case ModeKind::full: return "full";
    case ModeKind::coulomb_off_after: return "coulomb_off_after";
    case ModeKind::quantum_off_after: return "quantum_off_after";
    }
    return "full";
}

std::string mode_label(const TrajectoryMode& mode) {
    if (mode.kind == ModeKind::full) {
        return "full";
    }
    std::ostringstream out;
    out << to_string(mode.kind) << '(' << mode.t_switch << ')';
    return out.str();
}

std::vector<BohmianState> seed_states(std::span<const Point> seeds, double t0) {
    std::vector<BohmianState> states;
    states.reserve(seeds.size());
    for (const Point p : seeds) {
        BohmianState s;
        s.x = p;
        s.time = t0;
        states.push_back(s);
    }
    return states;
}

void refresh_velocities(std::span<BohmianState> states, const VelocityFrame& frame,
                        const TracerOptions& options) {
    for (auto& s : states) {
        if (!s.active() || !frame.grid().covers(s.x)) {
            continue;
        }
        if (auto v = guidance_velocity(frame.sample(s.x), frame.peak_density(), options.regularization)) {
            s.v = cap_speed(*v, options.regularization.v_cap);
        }
    }
}

TracerStats advance_trajectories(std::span<BohmianState> states, const VelocityFrame& now,
                                 const VelocityFrame& next, const MolecularModel& model,
                                 const LaserPulse& pulse, const TrajectoryMode& mode,
                                 const TracerOptions& options) {
    std::size_t hits = 0;
    std::size_t capped = 0;
    const auto count = static_cast<std::int64_t>(states.size());
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : hits, capped)
    for (std::int64_t i = 0; i < count; ++i) {
        TracerStats local;
        step_state(states[i], now, next, model, pulse, mode, options, local);
        hits += local.node_hits;
        capped += local.capped;
    }
    const TracerStats stats{hits, capped};
    log_stats(stats, now.time());
    return stats;
}

void advance_force_mode(std::span<BohmianState> states, const QuantumPotentialFrame& now,
                        const QuantumPotentialFrame& next, const MolecularModel& model,
                        const LaserPulse& pulse, const TracerOptions& options) {
    const double t = now.time();
    const double dt = next.time() - now.time();
    const auto total = [&](const QuantumPotentialFrame& frame, Point x, double time) {
        const Force2 c = classical_force(model, pulse, x.x1, x.x2, time);
        const Force2 q = frame.force(x);
        return Force2{c.f1 + q.f1, c.f2 + q.f2};
    };
    const auto count = static_cast<std::int64_t>(states.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < count; ++i) {
        BohmianState& s = states[i];
        if (!s.active()) {
            continue;
        }
        const Force2 f0 = total(now, s.x, t);
        const Point x{s.x.x1 + dt * s.v.v1 + 0.5 * dt * dt * f0.f1 / kElectronMass,
                      s.x.x2 + dt * s.v.v2 + 0.5 * dt * dt * f0.f2 / kElectronMass};
        s.x = x;
        s.time = t + dt;
        if (update_alive(s, options.tracking_limit)) {
            continue;
        }
        const Force2 f1 = total(next, x, t + dt);
        s.v.v1 += 0.5 * dt * (f0.f1 + f1.f1) / kElectronMass;
        s.v.v2 += 0.5 * dt * (f0.f2 + f1.f2) / kElectronMass;
    }
}

namespace serial {

TracerStats advance_trajectories(std::span<BohmianState> states, const VelocityFrame& now,
                                 const VelocityFrame& next, const MolecularModel& model,
                                 const LaserPulse& pulse, const TrajectoryMode& mode,
                                 const TracerOptions& options) {
    TracerStats stats;
    for (auto& s : states) {
        step_state(s, now, next, model, pulse, mode, options, stats);
    }
    return stats;
}

} // namespace serial

double check_non_crossing(const Trajectory& trajectory) {
    if (trajectory.samples.empty()) {
        return std::numeric_limits<double>::infinity();
    }
    const auto& first = trajectory.samples.front();
    const double orientation = first.x.x2 >= first.x.x1 ? 1.0 : -1.0;
    double min_sep = std::numeric_limits<double>::infinity();
    for (const auto& s : trajectory.samples) {
        min_sep = std::min(min_sep, orientation * (s.x.x2 - s.x.x1));
    }
    return min_sep;
}

} // namespace bohmion

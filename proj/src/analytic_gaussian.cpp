#include "bohmion/analytic_gaussian.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "bohmion/error.hpp"

namespace bohmion::analytic {

namespace {

using cplx = std::complex<double>;
constexpr cplx kI(0.0, 1.0);

struct PairTerms {
    cplx log_a;  // log g1(x1) g2(x2)
    cplx log_b;  // log g2(x1) g1(x2)
};

PairTerms pair_terms(const GaussianPacketParams& p1, const GaussianPacketParams& p2, double x1,
                     double x2, double t) {
    return {log_packet_value(p1, x1, t) + log_packet_value(p2, x2, t),
            log_packet_value(p2, x1, t) + log_packet_value(p1, x2, t)};
}

} // namespace

void GaussianPacketParams::validate() const {
    if (!(alpha0 > 0.0)) {
        throw Error(ErrorKind::validation, "packet width parameter must be positive");
    }
}

cplx width_parameter(const GaussianPacketParams& params, double t) {
    return params.alpha0 / (1.0 + 2.0 * kI * params.alpha0 * t);
}

double center(const GaussianPacketParams& params, double t) { return params.xc0 + params.p * t; }

cplx log_packet_value(const GaussianPacketParams& params, double x, double t) {
    const cplx a = width_parameter(params, t);
    const double d = x - center(params, t);
    const cplx gamma = 0.5 * params.p * params.p * t +
                       0.5 * kI * std::log(1.0 + 2.0 * kI * params.alpha0 * t);
    const double log_norm = 0.25 * std::log(2.0 * params.alpha0 / std::numbers::pi);
    return -a * d * d + kI * params.p * d + kI * gamma + log_norm;
}

cplx packet_value(const GaussianPacketParams& params, double x, double t) {
    return std::exp(log_packet_value(params, x, t));
}

cplx packet_log_derivative(const GaussianPacketParams& params, double x, double t) {
    return -2.0 * width_parameter(params, t) * (x - center(params, t)) + kI * params.p;
}

cplx pair_value(const GaussianPacketParams& p1, const GaussianPacketParams& p2, PairKind kind,
                double x1, double x2, double t) {
    if (kind == PairKind::product) {
        return packet_value(p1, x1, t) * packet_value(p2, x2, t);
    }
    const auto terms = pair_terms(p1, p2, x1, x2, t);
    return (std::exp(terms.log_a) + std::exp(terms.log_b)) / std::sqrt(2.0);
}

Velocity analytic_velocity(const GaussianPacketParams& p1, const GaussianPacketParams& p2,
                           PairKind kind, double x1, double x2, double t) {
    const cplx d1a = packet_log_derivative(p1, x1, t);
    const cplx d2a = packet_log_derivative(p2, x2, t);
    if (kind == PairKind::product) {
        return {kHbar / kElectronMass * d1a.imag(), kHbar / kElectronMass * d2a.imag()};
    }
    const cplx d1b = packet_log_derivative(p2, x1, t);
    const cplx d2b = packet_log_derivative(p1, x2, t);
    const auto terms = pair_terms(p1, p2, x1, x2, t);
    // Weights of the two terms relative to the larger one, so nothing underflows.
    cplx wa(1.0, 0.0);
    cplx wb(1.0, 0.0);
    if (terms.log_a.real() >= terms.log_b.real()) {
        wb = std::exp(terms.log_b - terms.log_a);
    } else {
        wa = std::exp(terms.log_a - terms.log_b);
    }
    const cplx denom = wa + wb;
    if (std::abs(denom) < 1e-300) {
        std::ostringstream msg;
        msg << "symmetrized pair has a node at (" << x1 << ", " << x2 << ", t = " << t << ")";
        throw Error(ErrorKind::node_singularity, msg.str());
    }
    const cplx g1 = (wa * d1a + wb * d1b) / denom;
    const cplx g2 = (wa * d2a + wb * d2b) / denom;
    return {kHbar / kElectronMass * g1.imag(), kHbar / kElectronMass * g2.imag()};
}

double approximate_velocity(const GaussianPacketParams& self, const GaussianPacketParams& other,
                            double x, double t) {
    const cplx e = std::exp(-8.0 * width_parameter(self, t) * center(self, t) * x +
                            4.0 * kI * x * self.p);
    return ((self.p + other.p * e) / (1.0 + e)).real();
}

double approximation_parameter(const GaussianPacketParams& params, double x, double t) {
    const double a0 = params.alpha0;
    return std::abs(x * a0 * a0 * t / (params.p * (1.0 + 4.0 * a0 * a0 * t * t)));
}

double packet_overlap(const GaussianPacketParams& p1, const GaussianPacketParams& p2, double t) {
    const double b1 = width_parameter(p1, t).real();
    const double b2 = width_parameter(p2, t).real();
    const double d = center(p1, t) - center(p2, t);
    const double n = std::pow(4.0 * b1 * b2 / (std::numbers::pi * std::numbers::pi), 0.25);
    return n * std::sqrt(std::numbers::pi / (b1 + b2)) * std::exp(-b1 * b2 * d * d / (b1 + b2));
}

WaveField sample_pair(const Grid2D& grid, const GaussianPacketParams& p1,
                      const GaussianPacketParams& p2, PairKind kind, double t) {
    return WaveField::sample(
        grid, [&](double x1, double x2) { return pair_value(p1, p2, kind, x1, x2, t); }, t);
}

Trajectory integrate_pair(const GaussianPacketParams& p1, const GaussianPacketParams& p2,
                          PairKind kind, Point start, double t_end, double dt,
                          std::size_t sample_every) {
    if (!(dt > 0.0)) {
        throw Error(ErrorKind::validation, "integration step must be positive");
    }
    if (sample_every == 0) {
        sample_every = 1;
    }
    Trajectory traj;
    traj.seed = start;
    const auto velocity = [&](Point x, double t) { return analytic_velocity(p1, p2, kind, x.x1, x.x2, t); };
    const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
    Point x = start;
    BohmianState s;
    s.x = x;
    s.v = velocity(x, 0.0);
    s.time = 0.0;
    traj.samples.push_back(s);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const Velocity k1 = velocity(x, t);
        const Velocity k2 = velocity({x.x1 + 0.5 * dt * k1.v1, x.x2 + 0.5 * dt * k1.v2}, t + 0.5 * dt);
        const Velocity k3 = velocity({x.x1 + 0.5 * dt * k2.v1, x.x2 + 0.5 * dt * k2.v2}, t + 0.5 * dt);
        const Velocity k4 = velocity({x.x1 + dt * k3.v1, x.x2 + dt * k3.v2}, t + dt);
        x.x1 += dt / 6.0 * (k1.v1 + 2.0 * (k2.v1 + k3.v1) + k4.v1);
        x.x2 += dt / 6.0 * (k1.v2 + 2.0 * (k2.v2 + k3.v2) + k4.v2);
        if ((k + 1) % sample_every == 0 || k + 1 == steps) {
            BohmianState out;
            out.x = x;
            out.time = static_cast<double>(k + 1) * dt;
            out.v = velocity(x, out.time);
            traj.samples.push_back(out);
        }
    }
    return traj;
}

DemoResult run_appendix_demo(const DemoOptions& options) {
    options.packet1.validate();
    options.packet2.validate();
    const Point start{options.packet1.xc0, options.packet2.xc0};
    DemoResult result;
    result.symmetrized = integrate_pair(options.packet1, options.packet2, PairKind::symmetrized, start,
                                        options.t_end, options.dt, options.sample_every);
    result.product = integrate_pair(options.packet1, options.packet2, PairKind::product, start,
                                    options.t_end, options.dt, options.sample_every);
    return result;
}

} // namespace bohmion::analytic

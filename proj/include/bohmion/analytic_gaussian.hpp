#pragma once

#include <complex>
#include <vector>

#include "bohmion/bohm.hpp"
#include "bohmion/grid.hpp"

namespace bohmion::analytic {

/// Free Gaussian wave packet exp[-a(t)(x - xc(t))^2 + i p (x - xc(t)) + i g(t)]
/// with a(t) = a0 / (1 + 2 i a0 t), xc(t) = xc0 + p t and
/// g(t) = p^2 t / 2 + (i/2) ln(1 + 2 i a0 t), scaled to unit norm.
struct GaussianPacketParams {
    double alpha0 = 0.2;
    double p = 3.0;
    double xc0 = -9.0;

    void validate() const;
};

enum class PairKind { symmetrized, product };

std::complex<double> width_parameter(const GaussianPacketParams& params, double t);
double center(const GaussianPacketParams& params, double t);

/// log of the normalized packet value, usable far in the tails.
std::complex<double> log_packet_value(const GaussianPacketParams& params, double x, double t);
std::complex<double> packet_value(const GaussianPacketParams& params, double x, double t);

/// d/dx log(packet) = -2 a(t) (x - xc(t)) + i p
std::complex<double> packet_log_derivative(const GaussianPacketParams& params, double x, double t);

/// Symmetrized: [g1(x1) g2(x2) + g2(x1) g1(x2)] / sqrt(2); product: g1(x1) g2(x2).
std::complex<double> pair_value(const GaussianPacketParams& p1, const GaussianPacketParams& p2,
                                PairKind kind, double x1, double x2, double t);

/// Exact guidance velocity of the pair by analytic differentiation. Throws
/// Error{node_singularity} at zeros of the symmetrized function.
Velocity analytic_velocity(const GaussianPacketParams& p1, const GaussianPacketParams& p2,
                           PairKind kind, double x1, double x2, double t);

/// Closed-form approximation valid while x a0^2 t / (p (1 + 4 a0^2 t^2)) << 1,
/// for mirror-image packets (xc2 = -xc1, p2 = -p1, equal widths).
double approximate_velocity(const GaussianPacketParams& self, const GaussianPacketParams& other,
                            double x, double t);

/// Left-hand side of the validity condition of approximate_velocity.
double approximation_parameter(const GaussianPacketParams& params, double x, double t);

/// Spatial overlap of the two packets, integral of |g1| |g2| dx, at time t.
double packet_overlap(const GaussianPacketParams& p1, const GaussianPacketParams& p2, double t);

/// Samples the pair on a grid (used to cross-check the grid machinery).
WaveField sample_pair(const Grid2D& grid, const GaussianPacketParams& p1,
                      const GaussianPacketParams& p2, PairKind kind, double t);

struct DemoOptions {
    GaussianPacketParams packet1{0.2, 3.0, -9.0};
    GaussianPacketParams packet2{0.2, -3.0, 9.0};
    double t_end = 6.0;
    double dt = 1e-3;
    std::size_t sample_every = 10;
};

struct DemoResult {
    Trajectory symmetrized;
    Trajectory product;
};

/// Integrates one trajectory through the analytic velocity field with
/// classic fixed-step RK4.
Trajectory integrate_pair(const GaussianPacketParams& p1, const GaussianPacketParams& p2,
                          PairKind kind, Point start, double t_end, double dt,
                          std::size_t sample_every);

/// The two counter-propagating packets, seeded at the packet centres.
DemoResult run_appendix_demo(const DemoOptions& options = {});

} // namespace bohmion::analytic

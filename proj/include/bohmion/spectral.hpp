#pragma once

#include <span>
#include <vector>

#include <fftw3.h>

#include "bohmion/grid.hpp"

namespace bohmion {

/// FFT workspace for one grid: owns the FFTW plans, the wavenumber table and
/// a scratch buffer. Plans use FFTW_ESTIMATE so results are reproducible from
/// run to run. Instances are not safe for concurrent use; give each thread
/// its own.
class Spectral {
public:
    explicit Spectral(const Grid2D& grid);
    ~Spectral();

    Spectral(const Spectral&) = delete;
    Spectral& operator=(const Spectral&) = delete;
    Spectral(Spectral&& other) noexcept;
    Spectral& operator=(Spectral&& other) noexcept;

    const Grid2D& grid() const noexcept { return grid_; }

    /// Angular wavenumbers in FFTW order (0, dk, ..., -dk).
    std::span<const double> wavenumbers() const noexcept { return k_; }

    /// Unnormalized in-place transforms; inverse(forward(x)) == n^2 * x.
    void forward(ComplexBuffer& data) const;
    void inverse(ComplexBuffer& data) const;

    /// Spectral derivative of the given order (1 or 2) along one axis.
    ComplexBuffer derivative(std::span<const Complex> values, Axis axis, int order) const;

    /// Both first derivatives with one forward transform.
    void gradient(std::span<const Complex> values, ComplexBuffer& d1, ComplexBuffer& d2) const;

    /// d2/dx1^2 + d2/dx2^2
    ComplexBuffer laplacian(std::span<const Complex> values) const;

    /// Transform of `values` kept in the internal scratch buffer, ready for
    /// the axis_factor helpers below. Returns the scratch buffer.
    const ComplexBuffer& transform_to_scratch(std::span<const Complex> values) const;

    /// (i k)^order / n^2 per index, with the Nyquist mode removed for odd orders.
    std::vector<Complex> axis_factor(int order) const;

private:
    void destroy() noexcept;

    Grid2D grid_;
    std::vector<double> k_;
    mutable ComplexBuffer scratch_;
    fftw_plan forward_ = nullptr;
    fftw_plan inverse_ = nullptr;
};

/// Largest |psi| found on the outermost rows and columns.
double edge_amplitude(const WaveField& field);

/// Logs a warning when edge_amplitude exceeds the threshold; returns whether it did.
bool warn_if_edge_mass(const WaveField& field, double threshold = 1e-8);

/// Spectral partial derivative of order 1 or 2 along axis 1 or 2. Emits the
/// edge-mass warning when the field is not negligible at the box boundary.
ComplexBuffer partial_derivative(const WaveField& field, Axis axis, int order);

} // namespace bohmion

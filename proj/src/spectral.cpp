#include "bohmion/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include <spdlog/spdlog.h>

#include "bohmion/error.hpp"
#include "bohmion/kernels.hpp"

namespace bohmion {

namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

} // namespace

Spectral::Spectral(const Grid2D& grid) : grid_(grid), k_(grid.n()), scratch_(grid.size()) {
    const std::size_t n = grid.n();
    const double dk = 2.0 * std::numbers::pi / grid.length();
    for (std::size_t j = 0; j < n; ++j) {
        const auto signed_j = j < n / 2 ? static_cast<double>(j)
                                        : static_cast<double>(j) - static_cast<double>(n);
        k_[j] = dk * signed_j;
    }
    const int ni = static_cast<int>(n);
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_2d(ni, ni, as_fftw(scratch_.data()), as_fftw(scratch_.data()),
                                FFTW_FORWARD, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_2d(ni, ni, as_fftw(scratch_.data()), as_fftw(scratch_.data()),
                                FFTW_BACKWARD, FFTW_ESTIMATE);
}

Spectral::~Spectral() { destroy(); }

Spectral::Spectral(Spectral&& other) noexcept
    : grid_(other.grid_), k_(std::move(other.k_)), scratch_(std::move(other.scratch_)),
      forward_(std::exchange(other.forward_, nullptr)),
      inverse_(std::exchange(other.inverse_, nullptr)) {}

Spectral& Spectral::operator=(Spectral&& other) noexcept {
    if (this != &other) {
        destroy();
        grid_ = other.grid_;
        k_ = std::move(other.k_);
        scratch_ = std::move(other.scratch_);
        forward_ = std::exchange(other.forward_, nullptr);
        inverse_ = std::exchange(other.inverse_, nullptr);
    }
    return *this;
}

void Spectral::destroy() noexcept {
    std::lock_guard lock(planner_mutex());
    if (forward_ != nullptr) {
        fftw_destroy_plan(forward_);
    }
    if (inverse_ != nullptr) {
        fftw_destroy_plan(inverse_);
    }
    forward_ = nullptr;
    inverse_ = nullptr;
}

void Spectral::forward(ComplexBuffer& data) const {
    fftw_execute_dft(forward_, as_fftw(data.data()), as_fftw(data.data()));
}

void Spectral::inverse(ComplexBuffer& data) const {
    fftw_execute_dft(inverse_, as_fftw(data.data()), as_fftw(data.data()));
}

std::vector<Complex> Spectral::axis_factor(int order) const {
    const std::size_t n = grid_.n();
    const double scale = 1.0 / static_cast<double>(grid_.size());
    std::vector<Complex> f(n);
    for (std::size_t j = 0; j < n; ++j) {
        Complex ik(0.0, k_[j]);
        if (order % 2 == 1 && j == n / 2) {
            ik = 0.0;
        }
        Complex p(1.0, 0.0);
        for (int o = 0; o < order; ++o) {
            p *= ik;
        }
        f[j] = p * scale;
    }
    return f;
}

const ComplexBuffer& Spectral::transform_to_scratch(std::span<const Complex> values) const {
    std::copy(values.begin(), values.end(), scratch_.begin());
    forward(scratch_);
    return scratch_;
}

ComplexBuffer Spectral::derivative(std::span<const Complex> values, Axis axis, int order) const {
    transform_to_scratch(values);
    ComplexBuffer out(grid_.size());
    const auto factor = axis_factor(order);
    kernels::axis_multiply(scratch_, out, factor, axis, grid_.n());
    inverse(out);
    return out;
}

void Spectral::gradient(std::span<const Complex> values, ComplexBuffer& d1, ComplexBuffer& d2) const {
    transform_to_scratch(values);
    d1.resize(grid_.size());
    d2.resize(grid_.size());
    const auto factor = axis_factor(1);
    kernels::axis_multiply(scratch_, d1, factor, Axis::x1, grid_.n());
    kernels::axis_multiply(scratch_, d2, factor, Axis::x2, grid_.n());
    inverse(d1);
    inverse(d2);
}

ComplexBuffer Spectral::laplacian(std::span<const Complex> values) const {
    transform_to_scratch(values);
    const std::size_t n = grid_.n();
    const double scale = 1.0 / static_cast<double>(grid_.size());
    ComplexBuffer out(grid_.size());
    for (std::size_t i1 = 0; i1 < n; ++i1) {
        for (std::size_t i2 = 0; i2 < n; ++i2) {
            const double k2 = k_[i1] * k_[i1] + k_[i2] * k_[i2];
            out[i1 * n + i2] = -k2 * scale * scratch_[i1 * n + i2];
        }
    }
    inverse(out);
    return out;
}

double edge_amplitude(const WaveField& field) {
    const std::size_t n = field.grid().n();
    double edge = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        edge = std::max({edge, std::abs(field.at(0, i)), std::abs(field.at(n - 1, i)),
                         std::abs(field.at(i, 0)), std::abs(field.at(i, n - 1))});
    }
    return edge;
}

bool warn_if_edge_mass(const WaveField& field, double threshold) {
    const double edge = edge_amplitude(field);
    if (edge > threshold) {
        spdlog::warn("edge amplitude {:.3e} exceeds {:.1e} at t = {:.3f}; box may be too small",
                     edge, threshold, field.time());
        return true;
    }
    return false;
}

ComplexBuffer partial_derivative(const WaveField& field, Axis axis, int order) {
    if (order != 1 && order != 2) {
        throw Error(ErrorKind::validation, "derivative order must be 1 or 2");
    }
    warn_if_edge_mass(field);
    const Spectral spectral(field.grid());
    return spectral.derivative(field.values(), axis, order);
}

} // namespace bohmion

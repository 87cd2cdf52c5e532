#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <new>
#include <span>
#include <vector>

#include <fftw3.h>

namespace bohmion {

using Complex = std::complex<double>;

/// Allocator backed by fftw_malloc so buffers meet FFTW's SIMD alignment.
template <class T>
struct FftwAllocator {
    using value_type = T;

    FftwAllocator() = default;
    template <class U>
    FftwAllocator(const FftwAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) {
        if (n > std::numeric_limits<std::size_t>::max() / sizeof(T)) {
            throw std::bad_array_new_length();
        }
        void* p = fftw_malloc(n * sizeof(T));
        if (p == nullptr) {
            throw std::bad_alloc();
        }
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) noexcept { fftw_free(p); }

    template <class U>
    bool operator==(const FftwAllocator<U>&) const noexcept { return true; }
};

using ComplexBuffer = std::vector<Complex, FftwAllocator<Complex>>;
using RealBuffer = std::vector<double>;

enum class Axis { x1 = 1, x2 = 2 };

/// A point in the two-electron configuration plane (a.u.).
struct Point {
    double x1 = 0.0;
    double x2 = 0.0;
};

/// Uniform square grid shared by both electron coordinates. Node i sits at
/// x_min + i * spacing; the grid is periodic with period x_max - x_min, so
/// x_max itself is not a node.
class Grid2D {
public:
    Grid2D() = default;

    double x_min() const noexcept { return x_min_; }
    double x_max() const noexcept { return x_max_; }
    std::size_t n() const noexcept { return n_; }
    double spacing() const noexcept { return spacing_; }
    double length() const noexcept { return x_max_ - x_min_; }
    double cell_area() const noexcept { return spacing_ * spacing_; }
    std::size_t size() const noexcept { return n_ * n_; }

    double node(std::size_t i) const noexcept { return x_min_ + static_cast<double>(i) * spacing_; }
    double last_node() const noexcept { return node(n_ - 1); }
    std::size_t index(std::size_t i1, std::size_t i2) const noexcept { return i1 * n_ + i2; }

    /// True when x lies within [x_min, last node], the region interpolation accepts.
    bool covers(double x) const noexcept { return x >= x_min_ && x <= last_node(); }
    bool covers(Point p) const noexcept { return covers(p.x1) && covers(p.x2); }

    friend bool operator==(const Grid2D& a, const Grid2D& b) noexcept {
        return a.x_min_ == b.x_min_ && a.x_max_ == b.x_max_ && a.n_ == b.n_;
    }

private:
    friend Grid2D make_grid(double x_min, double x_max, std::size_t n);

    double x_min_ = 0.0;
    double x_max_ = 0.0;
    std::size_t n_ = 0;
    double spacing_ = 0.0;
};

/// Throws Error{invalid_extent} when x_min >= x_max and Error{invalid_count}
/// for odd n or n < 8.
Grid2D make_grid(double x_min, double x_max, std::size_t n);

/// Symmetric grid [-half_extent, half_extent) with the requested spacing,
/// rounding the node count up to the next even number.
Grid2D make_grid_with_spacing(double half_extent, double spacing);

/// Complex two-electron amplitude psi(x1, x2) on a grid, stored row-major
/// with x1 as the row index.
class WaveField {
public:
    WaveField() = default;
    WaveField(Grid2D grid, double time);
    WaveField(Grid2D grid, ComplexBuffer amplitudes, double time);

    template <class F>
    static WaveField sample(const Grid2D& grid, F&& f, double time = 0.0) {
        WaveField field(grid, time);
        for (std::size_t i1 = 0; i1 < grid.n(); ++i1) {
            for (std::size_t i2 = 0; i2 < grid.n(); ++i2) {
                field.amplitudes_[grid.index(i1, i2)] = Complex(f(grid.node(i1), grid.node(i2)));
            }
        }
        return field;
    }

    const Grid2D& grid() const noexcept { return grid_; }
    double time() const noexcept { return time_; }
    std::span<const Complex> values() const noexcept { return amplitudes_; }
    const ComplexBuffer& buffer() const noexcept { return amplitudes_; }

    Complex at(std::size_t i1, std::size_t i2) const { return amplitudes_[grid_.index(i1, i2)]; }

    /// Whole-buffer access for operations that produce the next field in place.
    ComplexBuffer& mutable_buffer() noexcept { return amplitudes_; }
    void set_time(double t) noexcept { time_ = t; }

private:
    Grid2D grid_;
    ComplexBuffer amplitudes_;
    double time_ = 0.0;
};

} // namespace bohmion

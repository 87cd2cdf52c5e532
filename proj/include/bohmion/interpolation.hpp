#pragma once

#include <array>
#include <span>

#include "bohmion/grid.hpp"

namespace bohmion {

/// Tensor-product cubic Lagrange stencil (4 x 4 nodes) for one query point.
/// Reproduces polynomials up to degree three along each axis; the error for
/// smooth fields is O(h^4). Indices wrap periodically, matching the spectral
/// representation of the field.
struct Stencil {
    std::array<std::size_t, 4> rows{};
    std::array<std::size_t, 4> cols{};
    std::array<double, 4> w1{};
    std::array<double, 4> w2{};
    std::size_t n = 0;

    template <class T>
    T apply(std::span<const T> values) const {
        T acc{};
        for (int a = 0; a < 4; ++a) {
            T row{};
            const std::size_t base = rows[a] * n;
            for (int b = 0; b < 4; ++b) {
                row += w2[b] * values[base + cols[b]];
            }
            acc += w1[a] * row;
        }
        return acc;
    }
};

/// Throws Error{out_of_bounds} when the point is outside [x_min, last node]
/// on either axis.
Stencil make_stencil(const Grid2D& grid, Point point);

Complex interpolate(const Grid2D& grid, std::span<const Complex> values, Point point);
double interpolate(const Grid2D& grid, std::span<const double> values, Point point);

} // namespace bohmion

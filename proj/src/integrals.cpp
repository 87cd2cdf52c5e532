#include "bohmion/integrals.hpp"

#include <algorithm>
#include <cmath>

#include "bohmion/error.hpp"
#include "bohmion/kernels.hpp"

namespace bohmion {

namespace {

// Integral of the hat function centred at c (half-width h) over [a, b].
double hat_integral(double c, double h, double a, double b) {
    const auto primitive = [&](double x) {
        // Antiderivative of max(0, 1 - |x - c| / h), anchored at c - h.
        const double u = std::clamp((x - c) / h, -1.0, 1.0);
        return u <= 0.0 ? h * 0.5 * (1.0 + u) * (1.0 + u) : h * (1.0 - 0.5 * (1.0 - u) * (1.0 - u));
    };
    if (b <= a) {
        return 0.0;
    }
    return primitive(b) - primitive(a);
}

} // namespace

std::vector<double> interval_weights(const Grid2D& grid, double half_width) {
    const std::size_t n = grid.n();
    const double h = grid.spacing();
    const double a = std::max(-half_width, grid.x_min());
    const double b = std::min(half_width, grid.x_max());
    if (a <= grid.x_min() && b >= grid.x_max()) {
        return std::vector<double>(n, h);
    }
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = hat_integral(grid.node(i), h, a, b);
    }
    return w;
}

double region_norm(const WaveField& field, double half_width) {
    const auto w = interval_weights(field.grid(), half_width);
    return kernels::weighted_norm(field.values(), w, field.grid().n());
}

double total_norm(const WaveField& field) {
    return region_norm(field, std::max(std::abs(field.grid().x_min()), std::abs(field.grid().x_max())));
}

Complex overlap(const WaveField& a, const WaveField& b) {
    if (!(a.grid() == b.grid())) {
        throw Error(ErrorKind::grid_mismatch, "overlap of fields on different grids");
    }
    return kernels::inner_product(a.values(), b.values(), a.grid().n()) * a.grid().cell_area();
}

} // namespace bohmion

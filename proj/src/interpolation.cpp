#include "bohmion/interpolation.hpp"

#include <cmath>
#include <sstream>

#include "bohmion/error.hpp"

namespace bohmion {

namespace {

void axis_weights(const Grid2D& grid, double x, std::array<std::size_t, 4>& idx,
                  std::array<double, 4>& w) {
    const double s = (x - grid.x_min()) / grid.spacing();
    auto base = static_cast<std::ptrdiff_t>(std::floor(s));
    const auto n = static_cast<std::ptrdiff_t>(grid.n());
    if (base >= n - 1) {
        base = n - 1;
    }
    const double t = s - static_cast<double>(base);
    w[0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
    w[1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    w[2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
    w[3] = (t + 1.0) * t * (t - 1.0) / 6.0;
    for (std::ptrdiff_t a = 0; a < 4; ++a) {
        idx[a] = static_cast<std::size_t>(((base - 1 + a) % n + n) % n);
    }
}

} // namespace

Stencil make_stencil(const Grid2D& grid, Point point) {
    if (!grid.covers(point)) {
        std::ostringstream msg;
        msg << "point (" << point.x1 << ", " << point.x2 << ") outside grid ["
            << grid.x_min() << ", " << grid.last_node() << "]";
        throw Error(ErrorKind::out_of_bounds, msg.str());
    }
    Stencil s;
    s.n = grid.n();
    axis_weights(grid, point.x1, s.rows, s.w1);
    axis_weights(grid, point.x2, s.cols, s.w2);
    return s;
}

Complex interpolate(const Grid2D& grid, std::span<const Complex> values, Point point) {
    return make_stencil(grid, point).apply(values);
}

double interpolate(const Grid2D& grid, std::span<const double> values, Point point) {
    return make_stencil(grid, point).apply(values);
}

} // namespace bohmion

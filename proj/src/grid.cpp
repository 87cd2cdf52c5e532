#include "bohmion/grid.hpp"

#include <cmath>
#include <string>

#include "bohmion/error.hpp"

namespace bohmion {

Grid2D make_grid(double x_min, double x_max, std::size_t n) {
    if (!(x_min < x_max)) {
        throw Error(ErrorKind::invalid_extent,
                    "grid extent requires x_min < x_max, got [" + std::to_string(x_min) + ", " +
                        std::to_string(x_max) + "]");
    }
    if (n < 8 || n % 2 != 0) {
        throw Error(ErrorKind::invalid_count,
                    "grid needs an even node count >= 8, got " + std::to_string(n));
    }
    Grid2D g;
    g.x_min_ = x_min;
    g.x_max_ = x_max;
    g.n_ = n;
    g.spacing_ = (x_max - x_min) / static_cast<double>(n);
    return g;
}

Grid2D make_grid_with_spacing(double half_extent, double spacing) {
    if (!(spacing > 0.0) || !(half_extent > 0.0)) {
        throw Error(ErrorKind::invalid_extent, "half-extent and spacing must be positive");
    }
    auto n = static_cast<std::size_t>(std::llround(2.0 * half_extent / spacing));
    if (n % 2 != 0) {
        ++n;
    }
    return make_grid(-half_extent, half_extent, n);
}

WaveField::WaveField(Grid2D grid, double time)
    : grid_(grid), amplitudes_(grid.size(), Complex(0.0, 0.0)), time_(time) {}

WaveField::WaveField(Grid2D grid, ComplexBuffer amplitudes, double time)
    : grid_(grid), amplitudes_(std::move(amplitudes)), time_(time) {
    if (amplitudes_.size() != grid_.size()) {
        throw Error(ErrorKind::grid_mismatch, "amplitude count does not match grid size");
    }
}

} // namespace bohmion

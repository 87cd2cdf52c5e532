#pragma once

#include <vector>

#include "bohmion/grid.hpp"

namespace bohmion {

/// Trapezoidal weights of the nodes for integrating over |x| < half_width
/// along one axis: the exact integral of each node's linear hat function over
/// the interval. A half-width covering the whole box gives the periodic
/// trapezoidal weight `spacing` for every node.
std::vector<double> interval_weights(const Grid2D& grid, double half_width);

/// Integral of |psi|^2 over the square |x1|, |x2| < half_width.
double region_norm(const WaveField& field, double half_width);

/// Integral of |psi|^2 over the whole box.
double total_norm(const WaveField& field);

/// <a|b> with the grid measure.
Complex overlap(const WaveField& a, const WaveField& b);

} // namespace bohmion

#pragma once

// Data-parallel inner loops shared by the propagator, the integrals and the
// Bohmian tracer code. Every kernel exists twice: the OpenMP version in
// bohmion::kernels and a plain loop in bohmion::kernels::serial that the tests
// and the benchmark use as the reference. Reductions are done per row and then
// summed in row order so the result does not depend on the thread count.

#include <cstddef>
#include <span>

#include "bohmion/grid.hpp"

namespace bohmion::kernels {

/// data[i1, i2] *= table[i1, i2] * axis[i1] * axis[i2]
void potential_kick(std::span<Complex> data, std::span<const Complex> table,
                    std::span<const Complex> axis, std::size_t n);

/// data[i] *= factor[i]
void multiply(std::span<Complex> data, std::span<const Complex> factor);

/// data[i1, i2] *= mask[i1] * mask[i2]
void separable_mask(std::span<Complex> data, std::span<const double> mask, std::size_t n);

/// out[i1, i2] = in[i1, i2] * factor[i_axis]
void axis_multiply(std::span<const Complex> in, std::span<Complex> out,
                   std::span<const Complex> factor, Axis axis, std::size_t n);

/// sum over nodes of w[i1] * w[i2] * |data|^2
double weighted_norm(std::span<const Complex> data, std::span<const double> w, std::size_t n);

/// sum over nodes of conj(a) * b
Complex inner_product(std::span<const Complex> a, std::span<const Complex> b, std::size_t n);

/// out[i] = |data[i]|^2
void density(std::span<const Complex> data, std::span<double> out);

/// j[i] = Im(conj(psi[i]) * dpsi[i])
void current(std::span<const Complex> psi, std::span<const Complex> dpsi, std::span<double> j);

namespace serial {

void potential_kick(std::span<Complex> data, std::span<const Complex> table,
                    std::span<const Complex> axis, std::size_t n);
void multiply(std::span<Complex> data, std::span<const Complex> factor);
void separable_mask(std::span<Complex> data, std::span<const double> mask, std::size_t n);
void axis_multiply(std::span<const Complex> in, std::span<Complex> out,
                   std::span<const Complex> factor, Axis axis, std::size_t n);
double weighted_norm(std::span<const Complex> data, std::span<const double> w, std::size_t n);
Complex inner_product(std::span<const Complex> a, std::span<const Complex> b, std::size_t n);
void density(std::span<const Complex> data, std::span<double> out);
void current(std::span<const Complex> psi, std::span<const Complex> dpsi, std::span<double> j);

} // namespace serial

/// Number of OpenMP workers currently in use (1 without OpenMP).
int worker_count();

/// Sets the OpenMP worker count; values < 1 are ignored.
void set_worker_count(int workers);

} // namespace bohmion::kernels

#include "bohmion/kernels.hpp"

#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bohmion::kernels {

namespace {

using Index = std::int64_t;

double sum_rows(const std::vector<double>& rows) {
    double total = 0.0;
    for (double r : rows) {
        total += r;
    }
    return total;
}

} // namespace

void potential_kick(std::span<Complex> data, std::span<const Complex> table,
                    std::span<const Complex> axis, std::size_t n) {
    const auto rows = static_cast<Index>(n);
#pragma omp parallel for schedule(static)
    for (Index i1 = 0; i1 < rows; ++i1) {
        const Complex a1 = axis[i1];
        const std::size_t base = static_cast<std::size_t>(i1) * n;
        for (std::size_t i2 = 0; i2 < n; ++i2) {
            data[base + i2] *= table[base + i2] * (a1 * axis[i2]);
        }
    }
}

void multiply(std::span<Complex> data, std::span<const Complex> factor) {
    const auto count = static_cast<Index>(data.size());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < count; ++i) {
        data[i] *= factor[i];
    }
}

void separable_mask(std::span<Complex> data, std::span<const double> mask, std::size_t n) {
    const auto rows = static_cast<Index>(n);
#pragma omp parallel for schedule(static)
    for (Index i1 = 0; i1 < rows; ++i1) {
        const double m1 = mask[i1];
        const std::size_t base = static_cast<std::size_t>(i1) * n;
        for (std::size_t i2 = 0; i2 < n; ++i2) {
            data[base + i2] *= m1 * mask[i2];
        }
    }
}

void axis_multiply(std::span<const Complex> in, std::span<Complex> out,
                   std::span<const Complex> factor, Axis axis, std::size_t n) {
    const auto rows = static_cast<Index>(n);
#pragma omp parallel for schedule(static)
    for (Index i1 = 0; i1 < rows; ++i1) {
        const std::size_t base = static_cast<std::size_t>(i1) * n;
        if (axis == Axis::x1) {
            const Complex f = factor[i1];
            for (std::size_t i2 = 0; i2 < n; ++i2) {
                out[base + i2] = in[base + i2] * f;
            }
        } else {
            for (std::size_t i2 = 0; i2 < n; ++i2) {
                out[base + i2] = in[base + i2] * factor[i2];
            }
        }
    }
}

double weighted_norm(std::span<const Complex> data, std::span<const double> w, std::size_t n) {
    std::vector<double> rows(n, 0.0);
    const auto count = static_cast<Index>(n);
#pragma omp parallel for schedule(static)
    for (Index i1 = 0; i1 < count; ++i1) {
        if (w[i1] == 0.0) {
            continue;
        }
        const std::size_t base = static_cast<std::size_t>(i1) * n;
        double acc = 0.0;
        for (std::size_t i2 = 0; i2 < n; ++i2) {
            acc += w[i2] * std::norm(data[base + i2]);
        }
        rows[i1] = w[i1] * acc;
    }
    return sum_rows(rows);
}

Complex inner_product(std::span<const Complex> a, std::span<const Complex> b, std::size_t n) {
    std::vector<double> re(n, 0.0);
    std::vector<double> im(n, 0.0);
    const auto count = static_cast<Index>(n);
#pragma omp parallel for schedule(static)
    for (Index i1 = 0; i1 < count; ++i1) {
        const std::size_t base = static_cast<std::size_t>(i1) * n;
        Complex acc(0.0, 0.0);
        for (std::size_t i2 = 0; i2 < n; ++i2) {
            acc += std::conj(a[base + i2]) * b[base + i2];
        }
        re[i1] = acc.real();
        im[i1] = acc.imag();
    }
    return {sum_rows(re), sum_rows(im)};
}

void density(std::span<const Complex> data, std::span<double> out) {
    const auto count = static_cast<Index>(data.size());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < count; ++i) {
        out[i] = std::norm(data[i]);
    }
}

void current(std::span<const Complex> psi, std::span<const Complex> dpsi, std::span<double> j) {
    const auto count = static_cast<Index>(psi.size());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < count; ++i) {
        j[i] = (std::conj(psi[i]) * dpsi[i]).imag();
    }
}

int worker_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_worker_count(int workers) {
#ifdef _OPENMP
    if (workers >= 1) {
        omp_set_num_threads(workers);
    }
#else
    (void)workers;
#endif
}

namespace serial {

void potential_kick(std::span<Complex> data, std::span<const Complex> table,
                    std::span<const Complex> axis, std::size_t n) {
    for (std::size_t i1 = 0; i1 < n; ++i1) {
        for (std::size_t i2 = 0; i2 < n; ++i2) {
            data[i1 * n + i2] *= table[i1 * n + i2] * (axis[i1] * axis[i2]);
        }
    }
}

void multiply(std::span<Complex> data, std::span<const Complex> factor) {
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] *= factor[i];
    }
}

void separable_mask(std::span<Complex> data, std::span<const double> mask, std::size_t n) {
    for (std::size_t i1 = 0; i1 < n; ++i1) {
        for (std::size_t i2 = 0; i2 < n; ++i2) {
            data[i1 * n + i2] *= mask[i1] * mask[i2];
        }
    }
}

void axis_multiply(std::span<const Complex> in, std::span<Complex> out,
                   std::span<const Complex> factor, Axis axis, std::size_t n) {
    for (std::size_t i1 = 0; i1 < n; ++i1) {
        for (std::size_t i2 = 0; i2 < n; ++i2) {
            const Complex f = axis == Axis::x1 ? factor[i1] : factor[i2];
            out[i1 * n + i2] = in[i1 * n + i2] * f;
        }
    }
}

double weighted_norm(std::span<const Complex> data, std::span<const double> w, std::size_t n) {
    std::vector<double> rows(n, 0.0);
    for (std::size_t i1 = 0; i1 < n; ++i1) {
        if (w[i1] == 0.0) {
            continue;
        }
        double acc = 0.0;
        for (std::size_t i2 = 0; i2 < n; ++i2) {
            acc += w[i2] * std::norm(data[i1 * n + i2]);
        }
        rows[i1] = w[i1] * acc;
    }
    return sum_rows(rows);
}

Complex inner_product(std::span<const Complex> a, std::span<const Complex> b, std::size_t n) {
    std::vector<double> re(n, 0.0);
    std::vector<double> im(n, 0.0);
    for (std::size_t i1 = 0; i1 < n; ++i1) {
        Complex acc(0.0, 0.0);
        for (std::size_t i2 = 0; i2 < n; ++i2) {
            acc += std::conj(a[i1 * n + i2]) * b[i1 * n + i2];
        }
        re[i1] = acc.real();
        im[i1] = acc.imag();
    }
    return {sum_rows(re), sum_rows(im)};
}

void density(std::span<const Complex> data, std::span<double> out) {
    for (std::size_t i = 0; i < data.size(); ++i) {
        out[i] = std::norm(data[i]);
    }
}

void current(std::span<const Complex> psi, std::span<const Complex> dpsi, std::span<double> j) {
    for (std::size_t i = 0; i < psi.size(); ++i) {
        j[i] = (std::conj(psi[i]) * dpsi[i]).imag();
    }
}

} // namespace serial

} // namespace bohmion::kernels

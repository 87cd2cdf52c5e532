#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "bohmion/grid.hpp"
#include "bohmion/model.hpp"

namespace bohmion::testing {

/// Lowest eigenvalues of the discrete Hamiltonian (Fourier kinetic energy plus
/// nodal potential) restricted to exchange-symmetric vectors, by dense
/// diagonalization.
inline std::vector<double> dense_symmetric_spectrum(const Grid2D& g, const MolecularModel& m, int count) {
    const int n = static_cast<int>(g.n());
    const double L = g.length();
    // 1D kinetic matrix T_jk = (1/n) sum_m (k_m^2 / 2) cos(k_m (x_j - x_k)).
    Eigen::MatrixXd T(n, n);
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            double s = 0.0;
            for (int q = 0; q < n; ++q) {
                const int mq = q <= n / 2 ? q : q - n;
                const double kq = 2.0 * M_PI * mq / L;
                s += 0.5 * kq * kq * std::cos(kq * g.spacing() * (j - k));
            }
            T(j, k) = s / n;
        }
    }
    std::vector<std::pair<int, int>> basis;
    for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) {
            basis.emplace_back(a, b);
        }
    }
    const int dim = static_cast<int>(basis.size());
    // |s_ab> = N_ab (|a,b> + |b,a>) with N = 1/sqrt(2) off the diagonal and 1/2 on it;
    // H commutes with exchange, so <s_ab|H|s_cd> = 2 N_ab N_cd (h(ab,cd) + h(ab,dc)).
    const auto norm = [](int a, int b) { return a == b ? 0.5 : M_SQRT1_2; };
    const auto h_prod = [&](int a, int b, int c, int d) {
        double v = 0.0;
        if (b == d) v += T(a, c);
        if (a == c) v += T(b, d);
        if (a == c && b == d) v += softcore_potential(m, g.node(a), g.node(b));
        return v;
    };
    Eigen::MatrixXd H(dim, dim);
    for (int r = 0; r < dim; ++r) {
        const auto [a, b] = basis[r];
        for (int s = r; s < dim; ++s) {
            const auto [c, d] = basis[s];
            const double v = 2.0 * norm(a, b) * norm(c, d) * (h_prod(a, b, c, d) + h_prod(a, b, d, c));
            H(r, s) = H(s, r) = v;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H, Eigen::EigenvaluesOnly);
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
        out.push_back(solver.eigenvalues()(i));
    }
    return out;
}

} // namespace bohmion::testing

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace spme {

// Thomas algorithm for a tridiagonal system without pivoting.
//
// lower[i] multiplies x[i-1] (lower[0] unused), upper[i] multiplies x[i+1]
// (upper[n-1] unused). Stable for diagonally dominant or M-matrix systems,
// which covers every matrix assembled in this library.
inline std::vector<double> solve_tridiagonal(std::span<const double> lower,
                                             std::span<const double> diag,
                                             std::span<const double> upper,
                                             std::span<const double> rhs) {
    const std::size_t n = diag.size();
    std::vector<double> c_star(n);
    std::vector<double> x(n);
    if (n == 0) return x;

    double denom = diag[0];
    c_star[0] = n > 1 ? upper[0] / denom : 0.0;
    x[0] = rhs[0] / denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag[i] - lower[i] * c_star[i - 1];
        c_star[i] = i + 1 < n ? upper[i] / denom : 0.0;
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        x[i] -= c_star[i] * x[i + 1];
    }
    return x;
}

}  // namespace spme

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "rembed/core/dense_matrix.hpp"
#include "rembed/core/error.hpp"

namespace rembed {

/// Top-k eigenpairs of a symmetric matrix: orthonormal vectors (m x k)
/// and eigenvalues sorted nonincreasing. Eigenvalues are clamped at
/// zero; callers take square roots, and for the PSD Gram matrices this
/// type carries, negatives can only be round-off.
struct EigResult {
    DenseMatrix vectors;
    std::vector<double> values;
};

namespace detail {

/// Cyclic-by-row Jacobi sweeps on a symmetric matrix held in `a`;
/// rotations accumulate into `v`. Runs until the off-diagonal mass is
/// negligible relative to the Frobenius norm.
inline void jacobi_eig_inplace(DenseMatrix& a, DenseMatrix& v) {
    const std::size_t n = a.rows();
    v = DenseMatrix::identity(n);
    if (n < 2) return;

    double norm = frobenius_norm(a);
    if (norm == 0.0) return;
    const double stop = 1e-15 * norm;
    const std::size_t max_sweeps = 64;

    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        }
        if (std::sqrt(2.0 * off) <= stop) return;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= stop / static_cast<double>(n)) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // Rotate rows/columns p and q of A.
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a(i, p);
                    const double aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a(p, i);
                    const double aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v(i, p);
                    const double viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
    }
    throw ConvergenceError("jacobi_eig: no convergence in 64 sweeps", 0.0, 0.0, 64);
}

}  // namespace detail

/// Full dense symmetric eigensolve (cyclic Jacobi) truncated to the
/// top k pairs. F is validated to be symmetric within 1e-8 and
/// symmetrized as (F + F^T)/2 before factorization.
inline EigResult sym_eig_topk(const DenseMatrix& f, std::size_t k) {
    if (f.rows() != f.cols()) {
        throw DimensionError("sym_eig_topk: matrix must be square");
    }
    const std::size_t n = f.rows();
    if (k > n) {
        throw DimensionError("sym_eig_topk: k = " + std::to_string(k) + " exceeds dimension " +
                             std::to_string(n));
    }
    if (k < 1) throw DimensionError("sym_eig_topk: k must be >= 1");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::abs(f(i, j) - f(j, i)) > 1e-8) {
                throw ValidationError("sym_eig_topk: asymmetry beyond 1e-8 at (" +
                                      std::to_string(i) + "," + std::to_string(j) + ")");
            }
        }
    }
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (f(i, j) + f(j, i));
    }
    DenseMatrix rot;
    detail::jacobi_eig_inplace(a, rot);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    EigResult out;
    out.vectors = DenseMatrix(n, k);
    out.values.resize(k);
    for (std::size_t t = 0; t < k; ++t) {
        const std::size_t src = order[t];
        out.values[t] = std::max(a(src, src), 0.0);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, t) = rot(i, src);
    }
    return out;
}

}  // namespace rembed

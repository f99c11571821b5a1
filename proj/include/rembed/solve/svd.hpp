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

/// Thin SVD A = U diag(sigma) V^T with singular values sorted
/// nonincreasing. For sigma_i == 0 the corresponding columns of U and
/// V are zero rather than arbitrary unit vectors; callers filter by a
/// threshold before relying on them.
struct SvdResult {
    DenseMatrix u;              // rows(A) x min(rows, cols)
    std::vector<double> sigma;  // length min(rows, cols)
    DenseMatrix v;              // cols(A) x min(rows, cols)
};

/// One-sided Jacobi SVD. Rotations orthogonalize the columns of a
/// working copy of A while accumulating into V; column norms become
/// the singular values. Independent of the iterative-solver code
/// paths, which keeps it usable as a cross-check against them.
inline SvdResult svd_jacobi(const DenseMatrix& a_in) {
    if (a_in.rows() < 1 || a_in.cols() < 1) {
        throw DimensionError("svd_jacobi: matrix must be nonempty");
    }
    // Work on A^T when it is wider than tall so the rotation loop is
    // over the smaller dimension; swap U and V on the way out.
    const bool transposed = a_in.cols() > a_in.rows();
    DenseMatrix a = transposed ? transpose(a_in) : a_in;
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();

    DenseMatrix v = DenseMatrix::identity(n);
    const double eps = 1e-15;
    const std::size_t max_sweeps = 64;
    bool converged = false;
    for (std::size_t sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        converged = true;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                const double* cp = a.col(p);
                const double* cq = a.col(q);
                for (std::size_t i = 0; i < m; ++i) {
                    app += cp[i] * cp[i];
                    aqq += cq[i] * cq[i];
                    apq += cp[i] * cq[i];
                }
                if (std::abs(apq) <= eps * std::sqrt(app * aqq) || apq == 0.0) continue;
                converged = false;
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                double* wp = a.col(p);
                double* wq = a.col(q);
                for (std::size_t i = 0; i < m; ++i) {
                    const double xp = wp[i];
                    const double xq = wq[i];
                    wp[i] = c * xp - s * xq;
                    wq[i] = s * xp + c * xq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vp = v(i, p);
                    const double vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
    }
    if (!converged) {
        throw ConvergenceError("svd_jacobi: no convergence in 64 sweeps", 0.0, 0.0, 64);
    }

    std::vector<double> sigma(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s2 = 0.0;
        const double* cj = a.col(j);
        for (std::size_t i = 0; i < m; ++i) s2 += cj[i] * cj[i];
        sigma[j] = std::sqrt(s2);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return sigma[i] > sigma[j]; });

    SvdResult out;
    out.u = DenseMatrix(m, n);
    out.v = DenseMatrix(n, n);
    out.sigma.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        const std::size_t src = order[t];
        out.sigma[t] = sigma[src];
        if (sigma[src] > 0.0) {
            const double inv = 1.0 / sigma[src];
            const double* cj = a.col(src);
            for (std::size_t i = 0; i < m; ++i) out.u(i, t) = cj[i] * inv;
        }
        for (std::size_t i = 0; i < n; ++i) out.v(i, t) = v(i, src);
    }
    if (transposed) std::swap(out.u, out.v);
    return out;
}

/// Largest principal angle (radians) between the column spans of two
/// orthonormal bases with equal column counts. Uses the sine formula
/// theta = asin(sigma_max(V2 - V1 V1^T V2)), which stays accurate for
/// the near-zero angles the subspace-recovery tests assert on; the
/// cosine route loses those digits to cancellation.
inline double largest_principal_angle(const DenseMatrix& v1, const DenseMatrix& v2) {
    if (v1.rows() != v2.rows() || v1.cols() != v2.cols()) {
        throw DimensionError("largest_principal_angle: shape mismatch");
    }
    if (v1.cols() < 1) throw DimensionError("largest_principal_angle: empty basis");
    DenseMatrix c = gemm(v1, v2, /*transpose_a=*/true);  // V1^T V2
    DenseMatrix proj = gemm(v1, c);                      // V1 (V1^T V2)
    DenseMatrix r = v2;
    for (std::size_t i = 0; i < r.rows() * r.cols(); ++i) {
        r.values()[i] -= proj.values()[i];
    }
    SvdResult s = svd_jacobi(r);
    const double smax = s.sigma.empty() ? 0.0 : s.sigma.front();
    return std::asin(std::clamp(smax, 0.0, 1.0));
}

}  // namespace rembed

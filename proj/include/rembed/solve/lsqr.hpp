#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rembed/core/dense_matrix.hpp"
#include "rembed/core/error.hpp"
#include "rembed/core/sparse_matrix.hpp"

namespace rembed {

/// Settings for the iterative least-squares solver.
///
/// ridge_lambda is the l2 penalty on the solution; when unset it
/// resolves to 1e-6 times the mean squared row norm of the operator
/// (see resolved_ridge), a perturbation small enough to leave the
/// recovered subspace intact while stabilizing rank-deficient systems.
/// Pass an explicit 0 for the plain least-squares objective.
struct SolverConfig {
    std::optional<double> ridge_lambda{};
    double tol = 1e-10;
    std::size_t max_iters = 1000;

    void validate() const {
        if (ridge_lambda && !(*ridge_lambda >= 0.0)) {
            throw ValidationError("SolverConfig: ridge_lambda must be >= 0");
        }
        if (!(tol > 0.0)) throw ValidationError("SolverConfig: tol must be > 0");
        if (max_iters < 1) throw ValidationError("SolverConfig: max_iters must be >= 1");
    }
};

inline double resolved_ridge(const SparseMatrix& x, const SolverConfig& cfg) {
    if (cfg.ridge_lambda) return *cfg.ridge_lambda;
    if (x.rows() == 0) return 0.0;
    double sq = 0.0;
    for (double v : x.values()) sq += v * v;
    return 1e-6 * (sq / static_cast<double>(x.rows()));
}

/// Outcome of one single-column LSQR run.
struct LsqrResult {
    std::vector<double> x;
    bool converged = false;
    std::size_t iterations = 0;
    double gradient_norm = 0.0;   ///< ||A^T (A x - b) + lambda x||, explicitly computed
    double residual_norm = 0.0;   ///< ||A x - b||
    double gradient_scale = 0.0;  ///< ||A^T b||, the relative-stopping denominator
};

namespace detail {

inline double vec_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return std::sqrt(s);
}

/// Gradient of 1/2||Ax-b||^2 + lambda/2||x||^2 and the residual norm.
inline std::pair<double, double> explicit_gradient_norm(const SparseMatrix& a,
                                                        const std::vector<double>& x,
                                                        const double* b, double lambda,
                                                        std::vector<double>& r_buf,
                                                        std::vector<double>& g_buf) {
    a.mul_vec(x.data(), r_buf.data());
    for (std::size_t i = 0; i < a.rows(); ++i) r_buf[i] -= b[i];
    a.mul_vec_t(r_buf.data(), g_buf.data());
    for (std::size_t i = 0; i < a.cols(); ++i) g_buf[i] += lambda * x[i];
    return {vec_norm(g_buf), vec_norm(r_buf)};
}

}  // namespace detail

/// Damped LSQR (Golub-Kahan bidiagonalization) for
///   min_x ||b - A x||^2 + lambda ||x||^2
/// on the sparse operator; A^T A is never formed. Started from zero, so
/// for lambda = 0 on rank-deficient systems the iterates stay in
/// range(A^T) and converge to the minimum-norm solution.
///
/// Convergence is declared only after an explicit gradient evaluation
/// confirms ||A^T(Ax-b) + lambda x|| <= tol * ||A^T b||; the cheap
/// running estimate merely schedules those checks.
inline LsqrResult lsqr_solve(const SparseMatrix& a, const double* b, double lambda,
                             double tol, std::size_t max_iters) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    const double damp = std::sqrt(lambda);

    LsqrResult res;
    res.x.assign(n, 0.0);

    std::vector<double> u(b, b + m);
    std::vector<double> v(n, 0.0), w(n, 0.0);
    std::vector<double> tmp_m(m, 0.0), tmp_n(n, 0.0);

    double beta = detail::vec_norm(u);
    if (beta > 0.0) {
        for (auto& e : u) e /= beta;
        a.mul_vec_t(u.data(), v.data());
    }
    double alpha = detail::vec_norm(v);
    if (alpha > 0.0) {
        for (auto& e : v) e /= alpha;
    }
    w = v;

    // ||A^T b|| = alpha * beta exactly (v1 is A^T b normalized).
    const double grad_scale = alpha * beta;
    res.gradient_scale = grad_scale;
    if (grad_scale == 0.0) {
        // b is orthogonal to range(A): x = 0 is optimal for any lambda.
        res.converged = true;
        res.residual_norm = beta;
        return res;
    }

    double phibar = beta;
    double rhobar = alpha;
    double threshold = tol * grad_scale;

    for (std::size_t it = 1; it <= max_iters; ++it) {
        // Continue the bidiagonalization: beta u = A v - alpha u.
        a.mul_vec(v.data(), tmp_m.data());
        for (std::size_t i = 0; i < m; ++i) u[i] = tmp_m[i] - alpha * u[i];
        beta = detail::vec_norm(u);
        if (beta > 0.0) {
            for (auto& e : u) e /= beta;
        }
        // alpha v = A^T u - beta v.
        a.mul_vec_t(u.data(), tmp_n.data());
        for (std::size_t i = 0; i < n; ++i) v[i] = tmp_n[i] - beta * v[i];
        alpha = detail::vec_norm(v);
        if (alpha > 0.0) {
            for (auto& e : v) e /= alpha;
        }

        // Rotation eliminating the damping row.
        const double rhobar1 = std::hypot(rhobar, damp);
        const double c1 = rhobar / rhobar1;
        phibar = c1 * phibar;

        // Main plane rotation of the bidiagonal system.
        const double rho = std::hypot(rhobar1, beta);
        const double c = rhobar1 / rho;
        const double s = beta / rho;
        const double theta = s * alpha;
        rhobar = -c * alpha;
        const double phi = c * phibar;
        phibar = s * phibar;

        const double step = phi / rho;
        const double update = theta / rho;
        for (std::size_t i = 0; i < n; ++i) {
            res.x[i] += step * w[i];
            w[i] = v[i] - update * w[i];
        }
        res.iterations = it;

        // ||Abar^T rbar|| estimate for the damped system.
        const double grad_est = phibar * alpha * std::abs(c);
        if (grad_est <= threshold || it == max_iters) {
            auto [gn, rn] = detail::explicit_gradient_norm(a, res.x, b, lambda, tmp_m, tmp_n);
            res.gradient_norm = gn;
            res.residual_norm = rn;
            if (gn <= tol * grad_scale) {
                res.converged = true;
                return res;
            }
            // Estimate was optimistic; demand more before re-checking.
            threshold *= 0.5;
        }
        if (alpha == 0.0 || beta == 0.0) {
            // Krylov space exhausted: the iterate is as good as LSQR gets.
            auto [gn, rn] = detail::explicit_gradient_norm(a, res.x, b, lambda, tmp_m, tmp_n);
            res.gradient_norm = gn;
            res.residual_norm = rn;
            res.converged = gn <= tol * grad_scale;
            return res;
        }
    }
    return res;
}

/// Multi-right-hand-side ridge least squares: returns the Z minimizing
/// ||B - X Z||_F^2 + lambda ||Z||_F^2, one LSQR run per column.
inline DenseMatrix ridge_lstsq(const SparseMatrix& x, const DenseMatrix& b,
                               const SolverConfig& cfg = {}) {
    cfg.validate();
    if (x.rows() != b.rows()) {
        throw DimensionError("ridge_lstsq: X has " + std::to_string(x.rows()) + " rows, B has " +
                             std::to_string(b.rows()));
    }
    const double lambda = resolved_ridge(x, cfg);
    DenseMatrix z(x.cols(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        LsqrResult r = lsqr_solve(x, b.col(j), lambda, cfg.tol, cfg.max_iters);
        if (!r.converged) {
            throw ConvergenceError("ridge_lstsq: column " + std::to_string(j) +
                                       " did not converge in " + std::to_string(cfg.max_iters) +
                                       " iterations (gradient " + std::to_string(r.gradient_norm) +
                                       ", residual " + std::to_string(r.residual_norm) + ")",
                                   r.gradient_norm, r.residual_norm, r.iterations);
        }
        for (std::size_t i = 0; i < x.cols(); ++i) z(i, j) = r.x[i];
    }
    if (!z.is_finite()) {
        throw ConvergenceError("ridge_lstsq: non-finite solution", HUGE_VAL, HUGE_VAL, 0);
    }
    return z;
}

}  // namespace rembed

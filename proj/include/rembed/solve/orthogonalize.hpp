#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "rembed/core/dense_matrix.hpp"
#include "rembed/core/error.hpp"

namespace rembed {

/// Orthonormal basis for the column space of M, by Gram-Schmidt with a
/// full second reorthogonalization pass per column. Columns whose
/// residual norm after projection drops below 1e-12 times the largest
/// input column norm are linearly dependent and get removed, so the
/// result has exactly rank(M) columns (possibly zero).
inline DenseMatrix orthogonalize(const DenseMatrix& m) {
    if (m.rows() < 1 || m.cols() < 1) {
        throw DimensionError("orthogonalize: input must have at least one row and column");
    }
    const std::size_t rows = m.rows();

    double max_col_norm = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double s = 0.0;
        const double* cj = m.col(j);
        for (std::size_t i = 0; i < rows; ++i) s += cj[i] * cj[i];
        max_col_norm = std::max(max_col_norm, std::sqrt(s));
    }
    const double drop_tol = 1e-12 * max_col_norm;

    DenseMatrix q(rows, m.cols());
    std::size_t kept = 0;
    std::vector<double> v(rows);
    for (std::size_t j = 0; j < m.cols(); ++j) {
        const double* mj = m.col(j);
        for (std::size_t i = 0; i < rows; ++i) v[i] = mj[i];
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t t = 0; t < kept; ++t) {
                const double* qt = q.col(t);
                double dot = 0.0;
                for (std::size_t i = 0; i < rows; ++i) dot += qt[i] * v[i];
                for (std::size_t i = 0; i < rows; ++i) v[i] -= dot * qt[i];
            }
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < rows; ++i) norm += v[i] * v[i];
        norm = std::sqrt(norm);
        if (norm <= drop_tol) continue;
        double* qk = q.col(kept);
        for (std::size_t i = 0; i < rows; ++i) qk[i] = v[i] / norm;
        ++kept;
    }
    q.truncate_cols(kept);
    return q;
}

}  // namespace rembed

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "rembed/core/error.hpp"

namespace rembed {

/// Dense matrix with column-major storage. Entry (i, j) lives at
/// values()[i + j * rows()]. Zero-sized dimensions are allowed so that
/// rank-revealing routines can return 0-column results.
class DenseMatrix {
public:
    DenseMatrix() = default;

    /// Zero-initialized r x c matrix.
    DenseMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

    /// Wraps externally produced values (column-major). Rejects NaN/Inf
    /// so a diverged solve cannot propagate silently.
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols), values_(std::move(values)) {
        if (values_.size() != rows_ * cols_) {
            throw DimensionError("DenseMatrix: got " + std::to_string(values_.size()) +
                                 " values for a " + std::to_string(rows_) + "x" +
                                 std::to_string(cols_) + " matrix");
        }
        if (!is_finite()) {
            throw ValidationError("DenseMatrix: non-finite entry");
        }
    }

    /// Row-by-row construction for small literals in tests and examples.
    static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        const std::size_t r = rows.size();
        const std::size_t c = r == 0 ? 0 : rows.begin()->size();
        DenseMatrix m(r, c);
        std::size_t i = 0;
        for (const auto& row : rows) {
            if (row.size() != c) {
                throw DimensionError("DenseMatrix::from_rows: ragged rows");
            }
            std::size_t j = 0;
            for (double v : row) m(i, j++) = v;
            ++i;
        }
        if (!m.is_finite()) throw ValidationError("DenseMatrix::from_rows: non-finite entry");
        return m;
    }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return values_.size(); }

    double operator()(std::size_t i, std::size_t j) const { return values_[i + j * rows_]; }
    double& operator()(std::size_t i, std::size_t j) { return values_[i + j * rows_]; }

    const std::vector<double>& values() const noexcept { return values_; }
    std::vector<double>& values() noexcept { return values_; }

    const double* col(std::size_t j) const { return values_.data() + j * rows_; }
    double* col(std::size_t j) { return values_.data() + j * rows_; }

    bool is_finite() const noexcept {
        for (double v : values_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    /// Keeps the first `keep` columns, dropping the rest.
    void truncate_cols(std::size_t keep) {
        if (keep > cols_) throw DimensionError("truncate_cols: keep exceeds column count");
        values_.resize(rows_ * keep);
        cols_ = keep;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

inline DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix t(a.cols(), a.rows());
    for (std::size_t j = 0; j < a.cols(); ++j) {
        for (std::size_t i = 0; i < a.rows(); ++i) t(j, i) = a(i, j);
    }
    return t;
}

/// Dense product, optionally A^T B. The transposed variant accumulates
/// column dots in a fixed order, so for B == A the result is bitwise
/// symmetric.
inline DenseMatrix gemm(const DenseMatrix& a, const DenseMatrix& b, bool transpose_a = false) {
    const std::size_t inner_a = transpose_a ? a.rows() : a.cols();
    const std::size_t out_rows = transpose_a ? a.cols() : a.rows();
    if (inner_a != b.rows()) {
        throw DimensionError("gemm: inner dimensions " + std::to_string(inner_a) + " vs " +
                             std::to_string(b.rows()));
    }
    DenseMatrix c(out_rows, b.cols());
    if (transpose_a) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            const double* bj = b.col(j);
            double* cj = c.col(j);
            for (std::size_t i = 0; i < out_rows; ++i) {
                const double* ai = a.col(i);
                double acc = 0.0;
                for (std::size_t l = 0; l < b.rows(); ++l) acc += ai[l] * bj[l];
                cj[i] = acc;
            }
        }
    } else {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            const double* bj = b.col(j);
            double* cj = c.col(j);
            for (std::size_t l = 0; l < b.rows(); ++l) {
                const double blj = bj[l];
                if (blj == 0.0) continue;
                const double* al = a.col(l);
                for (std::size_t i = 0; i < out_rows; ++i) cj[i] += al[i] * blj;
            }
        }
    }
    return c;
}

inline double frobenius_norm(const DenseMatrix& a) {
    double s = 0.0;
    for (double v : a.values()) s += v * v;
    return std::sqrt(s);
}

inline double max_abs(const DenseMatrix& a) {
    double m = 0.0;
    for (double v : a.values()) m = std::max(m, std::abs(v));
    return m;
}

/// max |(A^T A - I)_ij|; the standard orthonormality defect.
inline double orthonormality_defect(const DenseMatrix& q) {
    double worst = 0.0;
    for (std::size_t i = 0; i < q.cols(); ++i) {
        for (std::size_t j = i; j < q.cols(); ++j) {
            const double* qi = q.col(i);
            const double* qj = q.col(j);
            double dot = 0.0;
            for (std::size_t l = 0; l < q.rows(); ++l) dot += qi[l] * qj[l];
            const double target = (i == j) ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(dot - target));
        }
    }
    return worst;
}

}  // namespace rembed

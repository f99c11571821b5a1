#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "rembed/core/dense_matrix.hpp"
#include "rembed/core/error.hpp"

namespace rembed {

/// Compressed sparse row matrix. Row r owns the half-open slice
/// [row_offsets[r], row_offsets[r+1]) of col_indices/values; column
/// indices are strictly increasing within a row and no explicit zeros
/// are stored.
class SparseMatrix {
public:
    SparseMatrix() = default;

    /// Adopts prebuilt CSR arrays after validating every invariant.
    SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
                 std::vector<std::size_t> col_indices, std::vector<double> values)
        : rows_(rows),
          cols_(cols),
          row_offsets_(std::move(row_offsets)),
          col_indices_(std::move(col_indices)),
          values_(std::move(values)) {
        validate();
    }

    /// Builds from (row, col, value) triplets: sorts, sums duplicates,
    /// drops entries that cancel to exact zero.
    static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                      std::vector<std::tuple<std::size_t, std::size_t, double>> t) {
        for (const auto& [i, j, v] : t) {
            if (i >= rows || j >= cols) {
                throw IndexError("from_triplets: entry (" + std::to_string(i) + "," +
                                 std::to_string(j) + ") outside " + std::to_string(rows) + "x" +
                                 std::to_string(cols));
            }
            (void)v;
        }
        std::sort(t.begin(), t.end(), [](const auto& a, const auto& b) {
            return std::get<0>(a) != std::get<0>(b) ? std::get<0>(a) < std::get<0>(b)
                                                    : std::get<1>(a) < std::get<1>(b);
        });
        std::vector<std::size_t> offsets(rows + 1, 0);
        std::vector<std::size_t> cols_out;
        std::vector<double> vals_out;
        cols_out.reserve(t.size());
        vals_out.reserve(t.size());
        std::size_t pos = 0;
        for (std::size_t r = 0; r < rows; ++r) {
            while (pos < t.size() && std::get<0>(t[pos]) == r) {
                const std::size_t c = std::get<1>(t[pos]);
                double v = std::get<2>(t[pos]);
                ++pos;
                while (pos < t.size() && std::get<0>(t[pos]) == r && std::get<1>(t[pos]) == c) {
                    v += std::get<2>(t[pos]);
                    ++pos;
                }
                if (v != 0.0) {
                    cols_out.push_back(c);
                    vals_out.push_back(v);
                }
            }
            offsets[r + 1] = cols_out.size();
        }
        return SparseMatrix(rows, cols, std::move(offsets), std::move(cols_out),
                            std::move(vals_out));
    }

    static SparseMatrix identity(std::size_t n) {
        std::vector<std::size_t> offsets(n + 1), cols(n);
        std::vector<double> vals(n, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            offsets[i + 1] = i + 1;
            cols[i] = i;
        }
        return SparseMatrix(n, n, std::move(offsets), std::move(cols), std::move(vals));
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return values_.size(); }

    const std::vector<std::size_t>& row_offsets() const noexcept { return row_offsets_; }
    const std::vector<std::size_t>& col_indices() const noexcept { return col_indices_; }
    const std::vector<double>& values() const noexcept { return values_; }

    /// y = A x
    void mul_vec(const double* x, double* y) const {
        for (std::size_t r = 0; r < rows_; ++r) {
            double acc = 0.0;
            for (std::size_t t = row_offsets_[r]; t < row_offsets_[r + 1]; ++t) {
                acc += values_[t] * x[col_indices_[t]];
            }
            y[r] = acc;
        }
    }

    /// y = A^T x, accumulated per stored entry; A^T is never formed.
    void mul_vec_t(const double* x, double* y) const {
        std::fill(y, y + cols_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r) {
            const double xr = x[r];
            if (xr == 0.0) continue;
            for (std::size_t t = row_offsets_[r]; t < row_offsets_[r + 1]; ++t) {
                y[col_indices_[t]] += values_[t] * xr;
            }
        }
    }

    DenseMatrix to_dense() const {
        DenseMatrix d(rows_, cols_);
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t t = row_offsets_[r]; t < row_offsets_[r + 1]; ++t) {
                d(r, col_indices_[t]) = values_[t];
            }
        }
        return d;
    }

    bool operator==(const SparseMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && row_offsets_ == o.row_offsets_ &&
               col_indices_ == o.col_indices_ && values_ == o.values_;
    }

private:
    void validate() const {
        if (row_offsets_.size() != rows_ + 1) {
            throw ValidationError("SparseMatrix: row_offsets length must be rows+1");
        }
        if (row_offsets_.front() != 0 || row_offsets_.back() != values_.size() ||
            col_indices_.size() != values_.size()) {
            throw ValidationError("SparseMatrix: offsets do not bracket the stored entries");
        }
        for (std::size_t r = 0; r < rows_; ++r) {
            if (row_offsets_[r] > row_offsets_[r + 1]) {
                throw ValidationError("SparseMatrix: row_offsets must be nondecreasing");
            }
            for (std::size_t t = row_offsets_[r]; t < row_offsets_[r + 1]; ++t) {
                if (col_indices_[t] >= cols_) {
                    throw IndexError("SparseMatrix: column index " +
                                     std::to_string(col_indices_[t]) + " >= cols " +
                                     std::to_string(cols_));
                }
                if (t > row_offsets_[r] && col_indices_[t - 1] >= col_indices_[t]) {
                    throw ValidationError(
                        "SparseMatrix: column indices must be strictly increasing within a row");
                }
                if (values_[t] == 0.0) {
                    throw ValidationError("SparseMatrix: explicit zero stored");
                }
                if (!std::isfinite(values_[t])) {
                    throw ValidationError("SparseMatrix: non-finite entry");
                }
            }
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_offsets_{0};
    std::vector<std::size_t> col_indices_;
    std::vector<double> values_;
};

/// C = A B for sparse A, dense B. Cost is nnz(A) * B.cols; empty columns
/// of A are never touched.
inline DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("spmm: A is " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + ", B has " + std::to_string(b.rows()) +
                             " rows");
    }
    DenseMatrix c(a.rows(), b.cols());
    const auto& off = a.row_offsets();
    const auto& idx = a.col_indices();
    const auto& val = a.values();
    for (std::size_t j = 0; j < b.cols(); ++j) {
        const double* bj = b.col(j);
        double* cj = c.col(j);
        for (std::size_t r = 0; r < a.rows(); ++r) {
            double acc = 0.0;
            for (std::size_t t = off[r]; t < off[r + 1]; ++t) acc += val[t] * bj[idx[t]];
            cj[r] = acc;
        }
    }
    return c;
}

/// C = A^T B without materializing A^T: each stored entry of A scatters
/// into the output column.
inline DenseMatrix spmm_t(const SparseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows()) {
        throw DimensionError("spmm_t: A has " + std::to_string(a.rows()) + " rows, B has " +
                             std::to_string(b.rows()));
    }
    DenseMatrix c(a.cols(), b.cols());
    const auto& off = a.row_offsets();
    const auto& idx = a.col_indices();
    const auto& val = a.values();
    for (std::size_t j = 0; j < b.cols(); ++j) {
        const double* bj = b.col(j);
        double* cj = c.col(j);
        for (std::size_t r = 0; r < a.rows(); ++r) {
            const double br = bj[r];
            if (br == 0.0) continue;
            for (std::size_t t = off[r]; t < off[r + 1]; ++t) cj[idx[t]] += val[t] * br;
        }
    }
    return c;
}

}  // namespace rembed

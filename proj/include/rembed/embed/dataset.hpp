#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "rembed/core/error.hpp"
#include "rembed/core/sparse_matrix.hpp"

namespace rembed {

/// A supervised sparse dataset: features X (n x d) and labels Y
/// (n x c, typically 0/1). Every example must carry at least one
/// label; loaders reject unlabeled rows before construction.
struct Dataset {
    SparseMatrix x;
    SparseMatrix y;

    Dataset(SparseMatrix x_in, SparseMatrix y_in) : x(std::move(x_in)), y(std::move(y_in)) {
        if (x.rows() != y.rows()) {
            throw DimensionError("Dataset: X has " + std::to_string(x.rows()) +
                                 " rows but Y has " + std::to_string(y.rows()));
        }
        for (std::size_t r = 0; r < y.rows(); ++r) {
            if (y.row_offsets()[r + 1] == y.row_offsets()[r]) {
                throw ValidationError("Dataset: example " + std::to_string(r) +
                                      " has no labels");
            }
        }
    }

    std::size_t n() const noexcept { return x.rows(); }
    std::size_t d() const noexcept { return x.cols(); }
    std::size_t c() const noexcept { return y.cols(); }

    /// Mean number of stored label entries per example.
    double avg_label_sparsity() const noexcept {
        return n() == 0 ? 0.0 : static_cast<double>(y.nnz()) / static_cast<double>(n());
    }
};

/// Returns a copy of `m` with each row scaled to unit L2 norm.
/// Rows must be nonempty (the Dataset invariant guarantees this for
/// label matrices, the only caller).
inline SparseMatrix l2_normalize_rows(const SparseMatrix& m) {
    std::vector<double> vals(m.values());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double s = 0.0;
        for (std::size_t i = m.row_offsets()[r]; i < m.row_offsets()[r + 1]; ++i) {
            s += vals[i] * vals[i];
        }
        if (s == 0.0) {
            throw ValidationError("l2_normalize_rows: row " + std::to_string(r) + " is empty");
        }
        const double inv = 1.0 / std::sqrt(s);
        for (std::size_t i = m.row_offsets()[r]; i < m.row_offsets()[r + 1]; ++i) {
            vals[i] *= inv;
        }
    }
    return SparseMatrix(m.rows(), m.cols(), m.row_offsets(), m.col_indices(), std::move(vals));
}

}  // namespace rembed

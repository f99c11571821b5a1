#pragma once

#include <string>

#include "rembed/core/dense_matrix.hpp"
#include "rembed/core/error.hpp"
#include "rembed/core/sparse_matrix.hpp"
#include "rembed/embed/dataset.hpp"
#include "rembed/embed/embedding.hpp"
#include "rembed/solve/lsqr.hpp"

namespace rembed {

/// Regression from features onto the embedded labels: Z = argmin
/// ||Y V - X Z||^2 + lambda ||Z||^2, a d x k map. X Z is each
/// example's predicted label embedding; the fit involves k targets
/// regardless of how many classes there are.
inline DenseMatrix embedding_regressor(const Dataset& data, const Embedding& emb,
                                       const SolverConfig& solver) {
    if (emb.v.rows() != data.c()) {
        throw DimensionError("embedding_regressor: embedding has " +
                             std::to_string(emb.v.rows()) + " label rows, dataset has " +
                             std::to_string(data.c()));
    }
    DenseMatrix yv = spmm(data.y, emb.v);
    return ridge_lstsq(data.x, yv, solver);
}

}  // namespace rembed

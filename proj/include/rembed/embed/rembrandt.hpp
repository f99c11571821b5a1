#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "rembed/core/dense_matrix.hpp"
#include "rembed/core/error.hpp"
#include "rembed/core/rng.hpp"
#include "rembed/core/sparse_matrix.hpp"
#include "rembed/embed/dataset.hpp"
#include "rembed/embed/embedding.hpp"
#include "rembed/solve/lsqr.hpp"
#include "rembed/solve/orthogonalize.hpp"
#include "rembed/solve/sym_eig.hpp"

namespace rembed {

namespace detail {

/// One implicit application of the target operator: given a sketch Q
/// (c x w), fit Z = argmin ||YQ - XZ||^2 + lambda||Z||^2 and return
/// Y^T (X Z). For lambda -> 0 this equals Y^T P Y Q where P projects
/// onto the column space of X, so the projector is applied without
/// ever being formed; cost is one pass over (X, Y).
inline DenseMatrix implicit_gram_apply(const SparseMatrix& x, const SparseMatrix& y,
                                       const DenseMatrix& q, const SolverConfig& solver,
                                       DenseMatrix* z_out = nullptr) {
    DenseMatrix yq = spmm(y, q);
    DenseMatrix z = ridge_lstsq(x, yq, solver);
    DenseMatrix xz = spmm(x, z);
    if (z_out != nullptr) *z_out = std::move(z);
    return spmm_t(y, xz);
}

}  // namespace detail

/// Randomized label embedding. Draws a Gaussian sketch of width k+p,
/// sharpens it with q rounds of implicit power iteration against
/// Y^T P Y, then extracts the top-k eigenpairs of that operator
/// compressed onto the sketch. Runs q+1 total passes over the data.
///
/// The returned V has orthonormal columns; sigma estimates the top-k
/// eigenvalues of Y^T P Y. The initial sketch is orthonormalized so
/// q = 0 is well defined (for q >= 1 that step changes nothing: the
/// first iteration only consumes the sketch's span).
inline Embedding rembrandt_embed(const Dataset& data, const EmbedConfig& cfg) {
    cfg.validate();
    if (data.n() < 1) throw ValidationError("rembrandt_embed: dataset is empty");
    if (data.c() < 1 || data.y.nnz() == 0) {
        throw ValidationError("rembrandt_embed: label matrix is empty");
    }
    if (cfg.k > data.c()) {
        throw DimensionError("rembrandt_embed: k = " + std::to_string(cfg.k) +
                             " exceeds label count c = " + std::to_string(data.c()));
    }
    std::size_t width = cfg.k + cfg.p;
    if (width > data.c()) {
        warn("rembrandt_embed: sketch width k+p = " + std::to_string(width) +
             " exceeds c = " + std::to_string(data.c()) + "; clamping to c");
        width = data.c();
    }

    SparseMatrix y_normalized;
    const SparseMatrix* y = &data.y;
    if (cfg.normalize_labels) {
        y_normalized = l2_normalize_rows(data.y);
        y = &y_normalized;
    }

    SeededRng rng(cfg.seed);
    DenseMatrix q = orthogonalize(randn(data.c(), width, rng));
    if (q.cols() < cfg.k) {
        throw RankError("rembrandt_embed: initial sketch rank " + std::to_string(q.cols()) +
                            " is below k",
                        q.cols());
    }

    for (std::size_t pass = 0; pass < cfg.q; ++pass) {
        DenseMatrix m = detail::implicit_gram_apply(data.x, *y, q, cfg.solver);
        q = orthogonalize(m);
        if (q.cols() < cfg.k) {
            throw RankError("rembrandt_embed: operator rank " + std::to_string(q.cols()) +
                                " is below k after power pass " + std::to_string(pass + 1),
                            q.cols());
        }
    }

    // Final learning pass: compress the squared operator onto span(Q)
    // and lift its top-k eigenvectors back to label space.
    DenseMatrix m = detail::implicit_gram_apply(data.x, *y, q, cfg.solver);
    DenseMatrix f = gemm(m, m, /*transpose_a=*/true);
    EigResult eig = sym_eig_topk(f, cfg.k);

    Embedding out;
    out.v = gemm(q, eig.vectors);
    out.sigma.resize(cfg.k);
    for (std::size_t i = 0; i < cfg.k; ++i) out.sigma[i] = std::sqrt(eig.values[i]);
    out.validate();
    return out;
}

}  // namespace rembed

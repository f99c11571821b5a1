#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rembed/core/dense_matrix.hpp"
#include "rembed/core/error.hpp"
#include "rembed/core/rng.hpp"
#include "rembed/core/sparse_matrix.hpp"
#include "rembed/embed/dataset.hpp"
#include "rembed/embed/embedding.hpp"
#include "rembed/solve/orthogonalize.hpp"
#include "rembed/solve/sym_eig.hpp"

namespace rembed {

/// Data-independent random label embedding in the compressed-sensing
/// style: an orthonormalized Gaussian c x k matrix. The raw-Gaussian
/// variant of the literature would work too; orthonormalizing costs
/// nothing here and keeps every Embedding carrying the same
/// invariants. sigma is all ones, as the construction is blind to the
/// data's spectrum.
inline Embedding cs_embed(std::size_t c, std::size_t k, std::uint64_t seed) {
    if (k < 1) throw ValidationError("cs_embed: k must be >= 1");
    if (k > c) {
        throw DimensionError("cs_embed: k = " + std::to_string(k) + " exceeds c = " +
                             std::to_string(c));
    }
    SeededRng rng(seed);
    Embedding out;
    out.v = orthogonalize(randn(c, k, rng));
    if (out.v.cols() < k) {
        throw RankError("cs_embed: Gaussian draw was rank deficient", out.v.cols());
    }
    out.sigma.assign(k, 1.0);
    out.validate();
    return out;
}

namespace detail {

/// Applies G = Xc^T Xc to S without forming the centered matrix:
/// Xc S = X S - 1 (mu^T S) and Xc^T T = X^T T - mu (1^T T).
inline DenseMatrix centered_gram_apply(const SparseMatrix& x, const std::vector<double>& mu,
                                       const DenseMatrix& s) {
    const std::size_t n = x.rows();
    const std::size_t w = s.cols();
    DenseMatrix t = spmm(x, s);
    std::vector<double> mu_s(w, 0.0);
    for (std::size_t j = 0; j < w; ++j) {
        const double* sj = s.col(j);
        double acc = 0.0;
        for (std::size_t i = 0; i < mu.size(); ++i) acc += mu[i] * sj[i];
        mu_s[j] = acc;
    }
    for (std::size_t j = 0; j < w; ++j) {
        double* tj = t.col(j);
        for (std::size_t i = 0; i < n; ++i) tj[i] -= mu_s[j];
    }
    DenseMatrix g = spmm_t(x, t);
    for (std::size_t j = 0; j < w; ++j) {
        double colsum = 0.0;
        const double* tj = t.col(j);
        for (std::size_t i = 0; i < n; ++i) colsum += tj[i];
        double* gj = g.col(j);
        for (std::size_t i = 0; i < mu.size(); ++i) gj[i] -= mu[i] * colsum;
    }
    return g;
}

}  // namespace detail

/// Unsupervised feature embedding: the top-k right singular subspace
/// of the column-mean-centered X, found with the same randomized
/// range-finder scheme as the label embedding but driven by implicit
/// products with Xc^T Xc. Returns W (d x k); rows of X W are the
/// k-dimensional representation.
inline DenseMatrix pca_feature_embed(const Dataset& data, std::size_t k,
                                     const EmbedConfig& cfg) {
    cfg.solver.validate();
    if (k < 1) throw ValidationError("pca_feature_embed: k must be >= 1");
    if (k > data.d()) {
        throw DimensionError("pca_feature_embed: k = " + std::to_string(k) + " exceeds d = " +
                             std::to_string(data.d()));
    }
    if (data.n() < 1) throw ValidationError("pca_feature_embed: dataset is empty");
    std::size_t width = k + cfg.p;
    if (width > data.d()) {
        warn("pca_feature_embed: sketch width k+p = " + std::to_string(width) +
             " exceeds d = " + std::to_string(data.d()) + "; clamping to d");
        width = data.d();
    }

    std::vector<double> mu(data.d(), 0.0);
    const SparseMatrix& x = data.x;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t i = x.row_offsets()[r]; i < x.row_offsets()[r + 1]; ++i) {
            mu[x.col_indices()[i]] += x.values()[i];
        }
    }
    for (double& v : mu) v /= static_cast<double>(data.n());

    SeededRng rng(cfg.seed);
    DenseMatrix q = orthogonalize(randn(data.d(), width, rng));
    if (q.cols() < k) {
        throw RankError("pca_feature_embed: initial sketch rank below k", q.cols());
    }
    for (std::size_t pass = 0; pass < cfg.q; ++pass) {
        q = orthogonalize(detail::centered_gram_apply(x, mu, q));
        if (q.cols() < k) {
            throw RankError("pca_feature_embed: centered features have rank " +
                                std::to_string(q.cols()) + " < k",
                            q.cols());
        }
    }
    DenseMatrix m = detail::centered_gram_apply(x, mu, q);
    DenseMatrix f = gemm(m, m, /*transpose_a=*/true);
    EigResult eig = sym_eig_topk(f, k);
    return gemm(q, eig.vectors);
}

}  // namespace rembed

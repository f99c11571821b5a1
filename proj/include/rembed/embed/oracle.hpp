#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "rembed/core/dense_matrix.hpp"
#include "rembed/core/error.hpp"
#include "rembed/core/sparse_matrix.hpp"
#include "rembed/embed/dataset.hpp"
#include "rembed/embed/embedding.hpp"
#include "rembed/solve/svd.hpp"

namespace rembed {

/// Brute-force reference embedding. Densifies X, builds the projector
/// onto its column space from a dense SVD, applies it to Y explicitly,
/// and reads the top-k right singular vectors off a second dense SVD.
/// sigma holds squared singular values of the projected label matrix,
/// directly comparable with rembrandt_embed's estimates. Guarded to
/// n*d <= 1e7 entries; this path exists to validate the randomized
/// one, not to scale.
inline Embedding exact_oracle(const Dataset& data, std::size_t k) {
    if (k < 1) throw ValidationError("exact_oracle: k must be >= 1");
    if (k > data.c()) {
        throw DimensionError("exact_oracle: k = " + std::to_string(k) + " exceeds c = " +
                             std::to_string(data.c()));
    }
    const double dense_entries = static_cast<double>(data.n()) * static_cast<double>(data.d());
    if (dense_entries > 1e7) {
        throw SizeGuardError("exact_oracle: n*d = " + std::to_string(data.n()) + "*" +
                             std::to_string(data.d()) + " exceeds the 1e7 dense-work guard");
    }

    SvdResult sx = svd_jacobi(data.x.to_dense());
    const double cutoff = sx.sigma.empty() ? 0.0 : 1e-10 * sx.sigma.front();
    std::size_t rank = 0;
    while (rank < sx.sigma.size() && sx.sigma[rank] > cutoff) ++rank;
    if (rank == 0) throw ValidationError("exact_oracle: X is the zero matrix");
    DenseMatrix u = sx.u;
    u.truncate_cols(rank);

    // Idempotence of the projector U U^T reduces to orthonormality of
    // the retained columns: P^2 - P = U (U^T U - I) U^T, and the inner
    // factor bounds the whole expression to first order.
    DenseMatrix gram = gemm(u, u, /*transpose_a=*/true);
    double defect = 0.0;
    for (std::size_t i = 0; i < rank; ++i) {
        for (std::size_t j = 0; j < rank; ++j) {
            const double target = i == j ? 1.0 : 0.0;
            const double dij = gram(i, j) - target;
            defect += dij * dij;
        }
    }
    if (std::sqrt(defect) > 1e-10) {
        throw ValidationError("exact_oracle: projector idempotence check failed");
    }

    // A = P Y = U (Y^T U)^T, formed densely at n x c.
    DenseMatrix ytu = spmm_t(data.y, u);              // c x rank
    DenseMatrix a = gemm(u, transpose(ytu));          // n x c
    SvdResult sa = svd_jacobi(a);

    if (sa.sigma.size() < k || sa.sigma[k - 1] == 0.0) {
        std::size_t achievable = 0;
        while (achievable < sa.sigma.size() && sa.sigma[achievable] > 0.0) ++achievable;
        throw RankError("exact_oracle: projected labels have rank " +
                            std::to_string(achievable) + " < k",
                        achievable);
    }

    Embedding out;
    out.v = sa.v;
    out.v.truncate_cols(k);
    out.sigma.resize(k);
    for (std::size_t i = 0; i < k; ++i) out.sigma[i] = sa.sigma[i] * sa.sigma[i];
    out.validate();
    return out;
}

}  // namespace rembed

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rembed/core/dense_matrix.hpp"
#include "rembed/core/error.hpp"
#include "rembed/solve/lsqr.hpp"

namespace rembed {

/// Configuration for the randomized embedding routines. Defaults
/// (p, q) = (20, 1) rarely need adjustment; the effective sketch width
/// k + p is clamped to the label count with a warning when it
/// overshoots.
struct EmbedConfig {
    std::size_t k = 1;
    std::size_t p = 20;
    std::size_t q = 1;
    std::uint64_t seed = 0;
    SolverConfig solver;
    /// Scale each label row to unit L2 norm before embedding.
    /// Off by default: raw 0/1 indicator rows weight examples by
    /// their label counts, which is the convention everywhere else
    /// in this library.
    bool normalize_labels = false;

    void validate() const {
        if (k < 1) throw ValidationError("EmbedConfig: k must be >= 1");
        solver.validate();
    }
};

/// A label embedding: V (c x k, orthonormal columns) plus sigma, the
/// estimated eigenvalues of Y^T P Y where P projects onto the column
/// space of X. Equivalently sigma holds squared singular values of
/// P Y, sorted nonincreasing.
struct Embedding {
    DenseMatrix v;
    std::vector<double> sigma;

    std::size_t c() const noexcept { return v.rows(); }
    std::size_t k() const noexcept { return v.cols(); }

    void validate() const {
        if (v.cols() < 1) throw ValidationError("Embedding: k must be >= 1");
        if (sigma.size() != v.cols()) {
            throw DimensionError("Embedding: sigma length " + std::to_string(sigma.size()) +
                                 " != k = " + std::to_string(v.cols()));
        }
        const double defect = orthonormality_defect(v);
        if (defect > 1e-8) {
            throw ValidationError("Embedding: columns of V are not orthonormal (defect " +
                                  std::to_string(defect) + ")");
        }
        for (std::size_t i = 0; i < sigma.size(); ++i) {
            if (sigma[i] < 0.0) throw ValidationError("Embedding: sigma must be nonnegative");
            if (i > 0 && sigma[i] > sigma[i - 1]) {
                throw ValidationError("Embedding: sigma must be nonincreasing");
            }
        }
    }
};

}  // namespace rembed

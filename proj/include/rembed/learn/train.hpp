#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "rembed/core/dense_matrix.hpp"
#include "rembed/core/error.hpp"
#include "rembed/core/rng.hpp"
#include "rembed/core/sparse_matrix.hpp"
#include "rembed/embed/dataset.hpp"
#include "rembed/embed/embedding.hpp"
#include "rembed/embed/regressor.hpp"
#include "rembed/learn/model.hpp"

namespace rembed {

/// Fits the embedding regressor and pairs it with the embedding's V:
/// scoring later computes (x^T Z) V^T per example, so both training
/// and prediction touch only k targets.
inline TrainedModel train_inner_product(const Dataset& data, const Embedding& emb,
                                        const SolverConfig& solver) {
    if (emb.v.cols() < 1) {
        throw ValidationError("train_inner_product: embedding must have k >= 1");
    }
    TrainedModel model;
    model.kind = ModelKind::inner_product_decoder;
    model.z = embedding_regressor(data, emb, solver);
    model.v = emb.v;
    model.validate();
    return model;
}

namespace detail {

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace detail

/// Fits one binary logistic head per label column on the k-dimensional
/// representation, by plain SGD with a fixed learning rate. Each class
/// trains on its own seeded stream (shuffle order included), so heads
/// are bitwise reproducible and independent of any parallel schedule.
/// Classes with no positive example get a bias-only head at the
/// Laplace-smoothed base rate. Returns heads only; Z and V stay empty
/// until the caller attaches the maps its representation came from.
inline TrainedModel train_independent_logistic(const DenseMatrix& emb_repr,
                                               const SparseMatrix& labels, std::size_t epochs,
                                               double lr, std::uint64_t seed) {
    const std::size_t n = emb_repr.rows();
    const std::size_t k = emb_repr.cols();
    const std::size_t c = labels.cols();
    if (n != labels.rows()) {
        throw DimensionError("train_independent_logistic: representation has " +
                             std::to_string(n) + " rows, labels have " +
                             std::to_string(labels.rows()));
    }
    if (k < 1) throw ValidationError("train_independent_logistic: representation has k = 0");
    if (c < 1) throw ValidationError("train_independent_logistic: no label columns");
    if (epochs < 1) throw ValidationError("train_independent_logistic: epochs must be >= 1");
    if (!(lr > 0.0)) throw ValidationError("train_independent_logistic: lr must be positive");

    std::vector<std::vector<std::size_t>> positives(c);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = labels.row_offsets()[r]; i < labels.row_offsets()[r + 1]; ++i) {
            positives[labels.col_indices()[i]].push_back(r);
        }
    }
    if (labels.nnz() == 0) {
        throw ValidationError("train_independent_logistic: no positive examples at all");
    }

    TrainedModel model;
    model.kind = ModelKind::independent_logistic;
    model.heads = DenseMatrix(c, k + 1);
    std::vector<char> is_pos(n, 0);
    std::vector<std::size_t> order(n);
    std::vector<double> w(k);

    for (std::size_t cls = 0; cls < c; ++cls) {
        if (positives[cls].empty()) {
            const double rate = 1.0 / static_cast<double>(n + 2);
            model.heads(cls, k) = std::log(rate / (1.0 - rate));
            continue;
        }
        for (std::size_t r : positives[cls]) is_pos[r] = 1;

        SeededRng rng(mix_seed(seed, cls));
        std::fill(w.begin(), w.end(), 0.0);
        double bias = 0.0;
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
            for (std::size_t i = n - 1; i > 0; --i) {
                const std::size_t j = rng.uniform_below(i + 1);
                std::swap(order[i], order[j]);
            }
            for (std::size_t idx : order) {
                double z = bias;
                for (std::size_t t = 0; t < k; ++t) z += w[t] * emb_repr(idx, t);
                const double g = detail::sigmoid(z) - (is_pos[idx] ? 1.0 : 0.0);
                for (std::size_t t = 0; t < k; ++t) w[t] -= lr * g * emb_repr(idx, t);
                bias -= lr * g;
            }
        }
        for (std::size_t t = 0; t < k; ++t) model.heads(cls, t) = w[t];
        model.heads(cls, k) = bias;

        for (std::size_t r : positives[cls]) is_pos[r] = 0;
    }
    model.validate();
    return model;
}

}  // namespace rembed

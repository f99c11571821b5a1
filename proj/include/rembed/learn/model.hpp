#pragma once

#include <cstddef>
#include <string>

#include "rembed/core/dense_matrix.hpp"
#include "rembed/core/error.hpp"

namespace rembed {

enum class ModelKind { inner_product_decoder, independent_logistic };

inline const char* model_kind_name(ModelKind k) {
    return k == ModelKind::inner_product_decoder ? "inner-product-decoder"
                                                 : "independent-logistic";
}

/// A trained classifier over embedded labels. Z (d x k) maps features
/// into the embedding space; V (c x k) maps embeddings back onto label
/// scores. Independent-logistic models additionally carry per-class
/// heads (c x (k+1), weights then bias) applied to the k-dimensional
/// representation; training produces the heads alone and the caller
/// attaches the (Z, V) pair the representation came from.
struct TrainedModel {
    ModelKind kind = ModelKind::inner_product_decoder;
    DenseMatrix z;
    DenseMatrix v;
    DenseMatrix heads;

    void validate() const {
        if (z.cols() != v.cols()) {
            throw DimensionError("TrainedModel: Z has " + std::to_string(z.cols()) +
                                 " columns but V has " + std::to_string(v.cols()));
        }
        const bool has_heads = heads.rows() > 0 || heads.cols() > 0;
        if (kind == ModelKind::independent_logistic) {
            if (!has_heads) {
                throw ValidationError("TrainedModel: independent-logistic model lacks heads");
            }
            if (v.rows() > 0 && heads.rows() != v.rows()) {
                throw DimensionError("TrainedModel: heads cover " +
                                     std::to_string(heads.rows()) + " classes, V has " +
                                     std::to_string(v.rows()));
            }
        } else if (has_heads) {
            throw ValidationError("TrainedModel: inner-product model must not carry heads");
        }
    }
};

/// Evaluation metrics: test_error is the fraction of examples whose
/// top-1 prediction misses the truth set, precision_at_1 its
/// complement. On single-label data test_error is exactly the
/// multiclass error rate.
struct EvalReport {
    double test_error = 0.0;
    double precision_at_1 = 0.0;
    std::size_t n_eval = 0;

    void validate() const {
        if (n_eval < 1) throw ValidationError("EvalReport: no examples evaluated");
        if (test_error < 0.0 || test_error > 1.0 || precision_at_1 < 0.0 ||
            precision_at_1 > 1.0) {
            throw ValidationError("EvalReport: metrics out of [0,1]");
        }
    }
};

}  // namespace rembed

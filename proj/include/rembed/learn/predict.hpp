#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "rembed/core/dense_matrix.hpp"
#include "rembed/core/error.hpp"
#include "rembed/core/sparse_matrix.hpp"
#include "rembed/learn/model.hpp"
#include "rembed/learn/train.hpp"

namespace rembed {

/// Ranked top-k label predictions, one list per example. Scores every
/// class through the model's decoder and keeps the best min(topk, c),
/// ties broken by ascending label index so output is deterministic.
inline std::vector<std::vector<std::size_t>> predict_topk(const TrainedModel& model,
                                                          const SparseMatrix& x_test,
                                                          std::size_t topk) {
    model.validate();
    if (topk < 1) throw ValidationError("predict_topk: topk must be >= 1");
    if (model.z.rows() == 0 || model.z.cols() == 0) {
        throw ValidationError("predict_topk: model carries no regression map Z");
    }
    if (x_test.cols() != model.z.rows()) {
        throw DimensionError("predict_topk: test features have " +
                             std::to_string(x_test.cols()) + " columns, Z expects " +
                             std::to_string(model.z.rows()));
    }
    const std::size_t c = model.kind == ModelKind::independent_logistic ? model.heads.rows()
                                                                        : model.v.rows();
    const std::size_t k = model.z.cols();
    const std::size_t n = x_test.rows();
    const std::size_t keep = std::min(topk, c);

    DenseMatrix repr = spmm(x_test, model.z);  // n x k
    std::vector<double> scores(c);
    std::vector<std::size_t> idx(c);
    std::vector<std::vector<std::size_t>> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (model.kind == ModelKind::inner_product_decoder) {
            for (std::size_t j = 0; j < c; ++j) {
                double s = 0.0;
                for (std::size_t t = 0; t < k; ++t) s += model.v(j, t) * repr(i, t);
                scores[j] = s;
            }
        } else {
            for (std::size_t j = 0; j < c; ++j) {
                double z = model.heads(j, k);
                for (std::size_t t = 0; t < k; ++t) z += model.heads(j, t) * repr(i, t);
                scores[j] = detail::sigmoid(z);
            }
        }
        std::iota(idx.begin(), idx.end(), 0);
        std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep),
                          idx.end(), [&](std::size_t a, std::size_t b) {
                              if (scores[a] != scores[b]) return scores[a] > scores[b];
                              return a < b;
                          });
        out[i].assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep));
    }
    return out;
}

/// Compares top-1 predictions against the truth set per example.
/// precision_at_1 counts hits; test_error is its complement, which on
/// single-label truth is exactly the multiclass error rate. Examples
/// with an empty truth row are excluded (precision@1 is undefined for
/// them) and reported through the warning hook.
inline EvalReport evaluate(const std::vector<std::vector<std::size_t>>& predictions,
                           const SparseMatrix& truth) {
    if (predictions.size() != truth.rows()) {
        throw DimensionError("evaluate: " + std::to_string(predictions.size()) +
                             " prediction lists for " + std::to_string(truth.rows()) +
                             " truth rows");
    }
    std::size_t evaluated = 0;
    std::size_t hits = 0;
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < truth.rows(); ++i) {
        const std::size_t begin = truth.row_offsets()[i];
        const std::size_t end = truth.row_offsets()[i + 1];
        if (begin == end) {
            ++skipped;
            continue;
        }
        if (predictions[i].empty()) {
            throw ValidationError("evaluate: empty prediction list at example " +
                                  std::to_string(i));
        }
        const std::size_t top1 = predictions[i][0];
        if (top1 >= truth.cols()) {
            throw IndexError("evaluate: predicted label " + std::to_string(top1) +
                             " outside truth's " + std::to_string(truth.cols()) + " classes");
        }
        ++evaluated;
        const auto* first = truth.col_indices().data() + begin;
        const auto* last = truth.col_indices().data() + end;
        if (std::binary_search(first, last, top1)) ++hits;
    }
    if (skipped > 0) {
        warn("evaluate: excluded " + std::to_string(skipped) + " unlabeled example" +
             (skipped == 1 ? "" : "s"));
    }
    if (evaluated == 0) throw ValidationError("evaluate: no labeled examples to score");

    EvalReport report;
    report.n_eval = evaluated;
    report.precision_at_1 = static_cast<double>(hits) / static_cast<double>(evaluated);
    report.test_error = 1.0 - report.precision_at_1;
    report.validate();
    return report;
}

}  // namespace rembed

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "rembed/core/dense_matrix.hpp"
#include "rembed/core/error.hpp"
#include "rembed/core/rng.hpp"
#include "rembed/core/sparse_matrix.hpp"
#include "rembed/embed/dataset.hpp"

namespace rembed {

/// Parameters for the planted-model generator. labels_per_example = 1
/// produces single-label (multiclass) data; larger values produce
/// multilabel rows with exactly that many positives.
struct SynthSpec {
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t c = 0;
    std::size_t true_rank = 1;
    double label_noise = 0.0;
    std::size_t labels_per_example = 1;
    std::uint64_t seed = 0;

    void validate() const {
        if (n < 2) throw ValidationError("SynthSpec: n must be >= 2 for a train/test split");
        if (d < 1 || c < 1) throw ValidationError("SynthSpec: d and c must be >= 1");
        if (true_rank < 1 || true_rank > std::min(d, c)) {
            throw ValidationError("SynthSpec: true_rank must lie in [1, min(d, c)]");
        }
        if (!(label_noise >= 0.0 && label_noise < 1.0)) {
            throw ValidationError("SynthSpec: label_noise must lie in [0, 1)");
        }
        if (labels_per_example < 1 || labels_per_example > c) {
            throw ValidationError("SynthSpec: labels_per_example must lie in [1, c]");
        }
    }
};

namespace detail {

inline double max_pairwise_cos(const DenseMatrix& b) {
    double m = -1.0;
    for (std::size_t i = 0; i < b.rows(); ++i) {
        for (std::size_t j = i + 1; j < b.rows(); ++j) {
            double dot = 0.0;
            for (std::size_t t = 0; t < b.cols(); ++t) dot += b(i, t) * b(j, t);
            m = std::max(m, dot);
        }
    }
    return m;
}

/// c unit rows in R^r, spread by tangential repulsion so that no two
/// planted class directions nearly coincide. Near-parallel pairs are
/// an (unstable) fixed point of the repulsion flow, so several
/// independent candidates are drawn and the least coherent one wins.
inline DenseMatrix spread_directions(std::size_t c, std::size_t r, SeededRng& rng) {
    DenseMatrix best;
    double best_cos = 2.0;
    for (int candidate = 0; candidate < 8; ++candidate) {
        DenseMatrix b = randn(c, r, rng);
        for (std::size_t i = 0; i < c; ++i) {
            double norm = 0.0;
            for (std::size_t t = 0; t < r; ++t) norm += b(i, t) * b(i, t);
            norm = std::sqrt(norm);
            for (std::size_t t = 0; t < r; ++t) b(i, t) /= norm;
        }
        std::vector<double> force(r);
        for (int iter = 0; iter < 200; ++iter) {
            DenseMatrix next = b;
            for (std::size_t i = 0; i < c; ++i) {
                std::fill(force.begin(), force.end(), 0.0);
                for (std::size_t j = 0; j < c; ++j) {
                    if (j == i) continue;
                    double dot = 0.0;
                    for (std::size_t t = 0; t < r; ++t) dot += b(i, t) * b(j, t);
                    for (std::size_t t = 0; t < r; ++t) force[t] += dot * b(j, t);
                }
                double norm = 0.0;
                for (std::size_t t = 0; t < r; ++t) {
                    next(i, t) = b(i, t) - 0.05 * force[t];
                    norm += next(i, t) * next(i, t);
                }
                norm = std::sqrt(norm);
                for (std::size_t t = 0; t < r; ++t) next(i, t) /= norm;
            }
            b = std::move(next);
        }
        const double coherence = c < 2 ? -1.0 : max_pairwise_cos(b);
        if (coherence < best_cos) {
            best_cos = coherence;
            best = std::move(b);
        }
    }
    return best;
}

/// Solves the small SPD system M u = t in place (partial pivoting;
/// M is true_rank x true_rank).
inline std::vector<double> solve_small(DenseMatrix m, std::vector<double> t) {
    const std::size_t r = m.rows();
    for (std::size_t k = 0; k < r; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < r; ++i) {
            if (std::abs(m(i, k)) > std::abs(m(piv, k))) piv = i;
        }
        if (m(piv, k) == 0.0) throw ValidationError("make_synthetic: degenerate support draw");
        if (piv != k) {
            for (std::size_t j = 0; j < r; ++j) std::swap(m(k, j), m(piv, j));
            std::swap(t[k], t[piv]);
        }
        for (std::size_t i = k + 1; i < r; ++i) {
            const double f = m(i, k) / m(k, k);
            if (f == 0.0) continue;
            for (std::size_t j = k; j < r; ++j) m(i, j) -= f * m(k, j);
            t[i] -= f * t[k];
        }
    }
    std::vector<double> u(r);
    for (std::size_t i = r; i-- > 0;) {
        double acc = t[i];
        for (std::size_t j = i + 1; j < r; ++j) acc -= m(i, j) * u[j];
        u[i] = acc / m(i, i);
    }
    return u;
}

inline SparseMatrix slice_rows(const SparseMatrix& m, std::size_t begin, std::size_t end) {
    std::vector<std::size_t> offsets(end - begin + 1);
    const std::size_t base = m.row_offsets()[begin];
    for (std::size_t r = begin; r <= end; ++r) offsets[r - begin] = m.row_offsets()[r] - base;
    std::vector<std::size_t> cols(m.col_indices().begin() + static_cast<std::ptrdiff_t>(base),
                                  m.col_indices().begin() +
                                      static_cast<std::ptrdiff_t>(m.row_offsets()[end]));
    std::vector<double> vals(m.values().begin() + static_cast<std::ptrdiff_t>(base),
                             m.values().begin() +
                                 static_cast<std::ptrdiff_t>(m.row_offsets()[end]));
    return SparseMatrix(end - begin, m.cols(), std::move(offsets), std::move(cols),
                        std::move(vals));
}

}  // namespace detail

/// Planted-model generator. Classes are directions b_g on the unit
/// sphere in R^r; each example is a sparse lift of a point clustered
/// tightly around its class direction, so scores X W0 (W0 = A B^T)
/// rank labels with a real margin. Noiseless multiclass instances are
/// therefore decodable at rank true_rank with zero training error,
/// which is the property the planted construction exists to provide.
/// label_noise replaces each positive, independently, with a uniformly
/// random label not already positive on that row. Rows are split
/// 80/20 by index into train and test. Deterministic given seed.
inline std::pair<Dataset, Dataset> make_synthetic(const SynthSpec& spec) {
    spec.validate();
    const std::size_t n = spec.n, d = spec.d, c = spec.c, r = spec.true_rank;
    const std::size_t lpe = spec.labels_per_example;
    SeededRng rng(spec.seed);

    DenseMatrix a = randn(d, r, rng);
    DenseMatrix b = detail::spread_directions(c, r, rng);
    const double margin = c < 2 ? 1.0 : 1.0 - detail::max_pairwise_cos(b);
    const double jitter = 0.1 * std::max(margin, 1e-3);
    const double gamma = 3.0;
    const std::size_t support = std::min(d, std::max<std::size_t>(10, r));

    std::vector<std::tuple<std::size_t, std::size_t, double>> xt, yt;
    xt.reserve(n * support);
    yt.reserve(n * lpe);
    std::vector<std::size_t> perm(d);
    std::vector<double> target(r), proj(r), scores(c);
    std::vector<std::size_t> ranked(c), row_labels;

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t g = i % c;
        rng.fill_normal(target.data(), r);
        for (std::size_t t = 0; t < r; ++t) target[t] = gamma * (b(g, t) + jitter * target[t]);

        // Sparse lift: the min-norm x on a random support with
        // A^T x = target, via the support's r x r Gram system.
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t t = 0; t < support; ++t) {
            const std::size_t j = t + rng.uniform_below(d - t);
            std::swap(perm[t], perm[j]);
        }
        DenseMatrix gram(r, r);
        for (std::size_t t1 = 0; t1 < r; ++t1) {
            for (std::size_t t2 = 0; t2 < r; ++t2) {
                double acc = 0.0;
                for (std::size_t s = 0; s < support; ++s) acc += a(perm[s], t1) * a(perm[s], t2);
                gram(t1, t2) = acc;
            }
        }
        std::vector<double> u = detail::solve_small(gram, target);
        for (std::size_t s = 0; s < support; ++s) {
            double xv = 0.0;
            for (std::size_t t = 0; t < r; ++t) xv += a(perm[s], t) * u[t];
            if (xv != 0.0) xt.emplace_back(i, perm[s], xv);
        }

        // Scores x^T A B^T, evaluated through the r-dim projection.
        std::fill(proj.begin(), proj.end(), 0.0);
        for (std::size_t s = 0; s < support; ++s) {
            double xv = 0.0;
            for (std::size_t t = 0; t < r; ++t) xv += a(perm[s], t) * u[t];
            for (std::size_t t = 0; t < r; ++t) proj[t] += a(perm[s], t) * xv;
        }
        for (std::size_t j = 0; j < c; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < r; ++t) s += b(j, t) * proj[t];
            scores[j] = s;
        }
        std::iota(ranked.begin(), ranked.end(), 0);
        std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(lpe),
                          ranked.end(), [&](std::size_t p, std::size_t q) {
                              if (scores[p] != scores[q]) return scores[p] > scores[q];
                              return p < q;
                          });
        row_labels.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(lpe));
        std::sort(row_labels.begin(), row_labels.end());

        if (spec.label_noise > 0.0 && c > lpe) {
            const std::vector<std::size_t> original = row_labels;
            for (std::size_t pos : original) {
                if (rng.uniform01() >= spec.label_noise) continue;
                // Uniform over labels not currently positive on this row.
                std::size_t pick = rng.uniform_below(c - lpe);
                std::size_t candidate = 0;
                std::size_t seen = 0;
                for (std::size_t j = 0; j < c; ++j) {
                    if (std::binary_search(row_labels.begin(), row_labels.end(), j)) continue;
                    if (seen == pick) {
                        candidate = j;
                        break;
                    }
                    ++seen;
                }
                row_labels.erase(std::find(row_labels.begin(), row_labels.end(), pos));
                row_labels.insert(
                    std::upper_bound(row_labels.begin(), row_labels.end(), candidate),
                    candidate);
            }
        }
        for (std::size_t lab : row_labels) yt.emplace_back(i, lab, 1.0);
    }

    SparseMatrix x = SparseMatrix::from_triplets(n, d, std::move(xt));
    SparseMatrix y = SparseMatrix::from_triplets(n, c, std::move(yt));
    const std::size_t split = (4 * n) / 5;
    Dataset train(detail::slice_rows(x, 0, split), detail::slice_rows(y, 0, split));
    Dataset test(detail::slice_rows(x, split, n), detail::slice_rows(y, split, n));
    return {std::move(train), std::move(test)};
}

}  // namespace rembed

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <tuple>
#include <vector>

#include "rembed/core/rng.hpp"
#include "rembed/embed/baselines.hpp"
#include "rembed/embed/oracle.hpp"
#include "rembed/embed/regressor.hpp"
#include "rembed/embed/rembrandt.hpp"
#include "rembed/solve/svd.hpp"
#include "support/gapped.hpp"
#include "support/oracles.hpp"

using rembed::Dataset;
using rembed::DenseMatrix;
using rembed::EmbedConfig;
using rembed::Embedding;
using rembed::SeededRng;
using rembed::SparseMatrix;

namespace {

std::vector<std::string> captured_warnings;
void capture_warning(const std::string& msg) { captured_warnings.push_back(msg); }

/// Top-k right singular vectors of a dense matrix.
DenseMatrix dense_topk_right(const DenseMatrix& a, std::size_t k) {
    rembed::SvdResult s = rembed::svd_jacobi(a);
    DenseMatrix v = s.v;
    v.truncate_cols(k);
    return v;
}

/// Label matrix with planted decaying spectrum: Y = U diag(s) B^T with
/// orthonormal U, B and strengths s. Dense-as-sparse; rows are nonzero
/// almost surely.
SparseMatrix planted_labels(std::size_t n, std::size_t c, const std::vector<double>& strengths,
                            SeededRng& rng) {
    const std::size_t r = strengths.size();
    DenseMatrix u = rembed::orthogonalize(rembed::randn(n, r, rng));
    DenseMatrix b = rembed::orthogonalize(rembed::randn(c, r, rng));
    std::vector<std::tuple<std::size_t, std::size_t, double>> trips;
    trips.reserve(n * c);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            double v = 0.0;
            for (std::size_t t = 0; t < r; ++t) v += u(i, t) * strengths[t] * b(j, t);
            if (v != 0.0) trips.emplace_back(i, j, v);
        }
    }
    return SparseMatrix::from_triplets(n, c, std::move(trips));
}

EmbedConfig exact_cfg(std::size_t k, std::size_t p, std::size_t q, std::uint64_t seed) {
    EmbedConfig cfg;
    cfg.k = k;
    cfg.p = p;
    cfg.q = q;
    cfg.seed = seed;
    cfg.solver.ridge_lambda = 0.0;  // oracle comparisons are against the unregularized object
    return cfg;
}

double max_rel_err(const std::vector<double>& got, const std::vector<double>& want) {
    double m = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        m = std::max(m, std::abs(got[i] - want[i]) / std::abs(want[i]));
    }
    return m;
}

}  // namespace

TEST_CASE("embed config defaults to p=20, q=1", "[embed]") {
    EmbedConfig cfg;
    REQUIRE(cfg.p == 20);
    REQUIRE(cfg.q == 1);
    REQUIRE_FALSE(cfg.normalize_labels);
}

TEST_CASE("identity features reduce the embedding to the label SVD", "[embed]") {
    SeededRng rng(301);
    const std::size_t n = 20, c = 8, k = 2;
    SparseMatrix y = planted_labels(n, c, {4.0, 2.5, 0.7, 0.3}, rng);
    Dataset data(SparseMatrix::identity(n), y);

    Embedding emb = rembed::rembrandt_embed(data, exact_cfg(k, 6, 3, 17));
    DenseMatrix v_ref = dense_topk_right(y.to_dense(), k);
    REQUIRE(rembed::largest_principal_angle(emb.v, v_ref) < 1e-6);

    // sigma estimates eigenvalues of Y^T Y here.
    rembed::SvdResult s = rembed::svd_jacobi(y.to_dense());
    REQUIRE(emb.sigma[0] == Catch::Approx(s.sigma[0] * s.sigma[0]).epsilon(1e-8));
    REQUIRE(emb.sigma[1] == Catch::Approx(s.sigma[1] * s.sigma[1]).epsilon(1e-8));
}

TEST_CASE("gapped instances recover the oracle subspace and spectrum", "[embed]") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto inst = testsupport::make_gapped_instance(40, 12, 9, 3, seed);
        Embedding emb = rembed::rembrandt_embed(inst.data, exact_cfg(3, 6, 3, seed + 100));
        REQUIRE(rembed::largest_principal_angle(emb.v, inst.oracle.v) < 1e-6);
        REQUIRE(max_rel_err(emb.sigma, inst.oracle.sigma) < 1e-6);
    }
}

TEST_CASE("rembrandt_embed is bitwise deterministic", "[embed]") {
    auto inst = testsupport::make_gapped_instance(30, 10, 7, 2, 5);
    EmbedConfig cfg = exact_cfg(2, 3, 2, 99);
    Embedding a = rembed::rembrandt_embed(inst.data, cfg);
    Embedding b = rembed::rembrandt_embed(inst.data, cfg);
    REQUIRE(a.v.values() == b.v.values());
    REQUIRE(a.sigma == b.sigma);
}

TEST_CASE("oversampling clamps to the label count with a warning", "[embed]") {
    auto inst = testsupport::make_gapped_instance(30, 10, 7, 2, 8);
    EmbedConfig cfg = exact_cfg(2, 20, 1, 3);  // 22 > c = 7
    captured_warnings.clear();
    rembed::set_warning_handler(capture_warning);
    Embedding emb = rembed::rembrandt_embed(inst.data, cfg);
    rembed::set_warning_handler(nullptr);
    REQUIRE(captured_warnings.size() == 1);
    REQUIRE(captured_warnings[0].find("clamping") != std::string::npos);
    REQUIRE(emb.v.rows() == 7);
    REQUIRE(emb.v.cols() == 2);
}

TEST_CASE("rembrandt_embed rejects impossible shapes", "[embed]") {
    auto inst = testsupport::make_gapped_instance(30, 10, 7, 2, 11);
    EmbedConfig cfg = exact_cfg(8, 0, 1, 0);  // k > c
    REQUIRE_THROWS_AS(rembed::rembrandt_embed(inst.data, cfg), rembed::DimensionError);

    Dataset empty(SparseMatrix(0, 4, {0}, {}, {}), SparseMatrix(0, 3, {0}, {}, {}));
    REQUIRE_THROWS_AS(rembed::rembrandt_embed(empty, exact_cfg(1, 0, 1, 0)),
                      rembed::ValidationError);
}

TEST_CASE("rank-deficient label structure raises a rank error", "[embed]") {
    // Every example carries only label 0, so the target operator has
    // rank 1 and cannot support k = 2.
    const std::size_t n = 12;
    SeededRng rng(21);
    SparseMatrix x = testsupport::random_sparse(n, 6, 3, rng);
    std::vector<std::tuple<std::size_t, std::size_t, double>> trips;
    for (std::size_t i = 0; i < n; ++i) trips.emplace_back(i, 0, 1.0);
    SparseMatrix y = SparseMatrix::from_triplets(n, 5, std::move(trips));
    Dataset data(std::move(x), std::move(y));
    try {
        rembed::rembrandt_embed(data, exact_cfg(2, 2, 1, 7));
        FAIL("expected RankError");
    } catch (const rembed::RankError& e) {
        REQUIRE(e.achievable_k == 1);
    }
}

TEST_CASE("implicit product equals the dense projected operator", "[embed]") {
    SeededRng rng(606);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t n = 30, d = 8, c = 6, w = 4;
        SparseMatrix x = testsupport::random_sparse(n, d, 4, rng);
        SparseMatrix y = testsupport::random_sparse(n, c, 2, rng);
        DenseMatrix q = rembed::randn(c, w, rng);

        // Implicit route: Y^T (X Z) with Z the unregularized fit.
        rembed::SolverConfig solver;
        solver.ridge_lambda = 0.0;
        DenseMatrix lhs = rembed::detail::implicit_gram_apply(x, y, q, solver);

        // Dense route: project Y Q onto the column space of X.
        DenseMatrix xd = x.to_dense();
        rembed::SvdResult s = rembed::svd_jacobi(xd);
        std::size_t rank = 0;
        while (rank < s.sigma.size() && s.sigma[rank] > 1e-10 * s.sigma[0]) ++rank;
        DenseMatrix u = s.u;
        u.truncate_cols(rank);
        DenseMatrix yq = spmm(y, q);
        DenseMatrix proj = testsupport::ref_matmul(
            u, testsupport::ref_matmul(u, yq, /*transpose_a=*/true));
        DenseMatrix rhs(c, w);
        DenseMatrix yd = y.to_dense();
        rhs = testsupport::ref_matmul(yd, proj, /*transpose_a=*/true);

        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < c * w; ++i) {
            const double dv = lhs.values()[i] - rhs.values()[i];
            num += dv * dv;
            den += rhs.values()[i] * rhs.values()[i];
        }
        REQUIRE(std::sqrt(num / den) < 1e-8);
    }
}

TEST_CASE("subspace error decays with extra power passes", "[embed]") {
    // Narrow sketch (k + p < c) so the iteration has real work to do;
    // median angle over seeds must shrink from q=0 to q=5 and never
    // regress along the way beyond numerical-floor ties.
    const std::size_t k = 3;
    std::vector<std::size_t> qs = {0, 1, 2, 3, 5};
    std::vector<std::vector<double>> angles(qs.size());
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto inst = testsupport::make_gapped_instance(40, 12, 9, k, 1000 + seed);
        for (std::size_t qi = 0; qi < qs.size(); ++qi) {
            Embedding emb =
                rembed::rembrandt_embed(inst.data, exact_cfg(k, 1, qs[qi], 7 * seed + 1));
            angles[qi].push_back(rembed::largest_principal_angle(emb.v, inst.oracle.v));
        }
    }
    std::vector<double> medians;
    for (auto& a : angles) {
        std::sort(a.begin(), a.end());
        medians.push_back(0.5 * (a[4] + a[5]));
    }
    for (std::size_t i = 1; i < medians.size(); ++i) {
        REQUIRE(medians[i] <= medians[i - 1] + 1e-9);
    }
    REQUIRE(medians.back() < 0.9 * medians.front());
}

TEST_CASE("exact_oracle with identity features factors the labels", "[embed]") {
    SeededRng rng(41);
    const std::size_t n = 15, c = 6, k = 3;
    SparseMatrix y = planted_labels(n, c, {3.0, 2.0, 1.2, 0.5}, rng);
    Dataset data(SparseMatrix::identity(n), y);
    Embedding oracle = rembed::exact_oracle(data, k);
    rembed::SvdResult s = rembed::svd_jacobi(y.to_dense());
    DenseMatrix v_ref = s.v;
    v_ref.truncate_cols(k);
    REQUIRE(rembed::largest_principal_angle(oracle.v, v_ref) < 1e-8);
    for (std::size_t i = 0; i < k; ++i) {
        REQUIRE(oracle.sigma[i] == Catch::Approx(s.sigma[i] * s.sigma[i]).epsilon(1e-10));
    }
}

TEST_CASE("exact_oracle fixes the projector's own range", "[embed]") {
    // Labels equal features (c = d): the projector leaves Y untouched,
    // so V spans the top right singular subspace of X itself.
    SeededRng rng(77);
    SparseMatrix x = testsupport::random_sparse(20, 7, 3, rng);
    Dataset data(x, x);
    Embedding oracle = rembed::exact_oracle(data, 3);
    DenseMatrix v_ref = dense_topk_right(x.to_dense(), 3);
    REQUIRE(rembed::largest_principal_angle(oracle.v, v_ref) < 1e-6);
}

TEST_CASE("exact_oracle refuses oversized dense work", "[embed]") {
    const std::size_t n = 20000, d = 1000;
    std::vector<std::tuple<std::size_t, std::size_t, double>> xt, yt;
    for (std::size_t i = 0; i < n; ++i) {
        xt.emplace_back(i, i % d, 1.0);
        yt.emplace_back(i, i % 3, 1.0);
    }
    Dataset data(SparseMatrix::from_triplets(n, d, std::move(xt)),
                 SparseMatrix::from_triplets(n, 3, std::move(yt)));
    REQUIRE_THROWS_AS(rembed::exact_oracle(data, 2), rembed::SizeGuardError);
}

TEST_CASE("cs_embed yields a deterministic orthonormal basis", "[embed]") {
    Embedding a = rembed::cs_embed(5, 5, 31);
    REQUIRE(a.v.rows() == 5);
    REQUIRE(a.v.cols() == 5);
    REQUIRE(rembed::orthonormality_defect(a.v) < 1e-10);
    for (double s : a.sigma) REQUIRE(s == 1.0);

    Embedding b = rembed::cs_embed(5, 5, 31);
    REQUIRE(a.v.values() == b.v.values());
    Embedding c = rembed::cs_embed(5, 5, 32);
    REQUIRE(a.v.values() != c.v.values());

    REQUIRE_THROWS_AS(rembed::cs_embed(3, 4, 0), rembed::DimensionError);
}

TEST_CASE("pca concentrates on the only varying coordinate", "[embed]") {
    // Column 0 is constant (killed by centering); column 1 varies.
    std::vector<std::tuple<std::size_t, std::size_t, double>> xt, yt;
    const std::size_t n = 10;
    for (std::size_t i = 0; i < n; ++i) {
        xt.emplace_back(i, 0, 1.0);
        xt.emplace_back(i, 1, static_cast<double>(i % 4) - 1.5);
        yt.emplace_back(i, 0, 1.0);
    }
    Dataset data(SparseMatrix::from_triplets(n, 2, std::move(xt)),
                 SparseMatrix::from_triplets(n, 1, std::move(yt)));
    EmbedConfig cfg = exact_cfg(1, 1, 2, 9);
    DenseMatrix w = rembed::pca_feature_embed(data, 1, cfg);
    REQUIRE(w.rows() == 2);
    REQUIRE(w.cols() == 1);
    REQUIRE(std::abs(w(1, 0)) > 0.99);
}

TEST_CASE("pca matches the dense SVD of the centered features", "[embed]") {
    SeededRng rng(2001);
    SparseMatrix x = testsupport::random_sparse(60, 10, 6, rng);
    std::vector<std::tuple<std::size_t, std::size_t, double>> yt;
    for (std::size_t i = 0; i < 60; ++i) yt.emplace_back(i, 0, 1.0);
    Dataset data(x, SparseMatrix::from_triplets(60, 1, std::move(yt)));

    captured_warnings.clear();
    rembed::set_warning_handler(capture_warning);
    EmbedConfig cfg = exact_cfg(4, 20, 3, 5);  // width clamps to d = 10
    DenseMatrix w = rembed::pca_feature_embed(data, 4, cfg);
    rembed::set_warning_handler(nullptr);
    REQUIRE_FALSE(captured_warnings.empty());

    DenseMatrix xc = x.to_dense();
    for (std::size_t j = 0; j < 10; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < 60; ++i) mean += xc(i, j);
        mean /= 60.0;
        for (std::size_t i = 0; i < 60; ++i) xc(i, j) -= mean;
    }
    DenseMatrix v_ref = dense_topk_right(xc, 4);
    REQUIRE(rembed::largest_principal_angle(w, v_ref) < 1e-6);
}

TEST_CASE("full-dimensional pca is an orthogonal reconstruction", "[embed]") {
    SeededRng rng(88);
    SparseMatrix x = testsupport::random_sparse(25, 6, 4, rng);
    std::vector<std::tuple<std::size_t, std::size_t, double>> yt;
    for (std::size_t i = 0; i < 25; ++i) yt.emplace_back(i, 0, 1.0);
    Dataset data(x, SparseMatrix::from_triplets(25, 1, std::move(yt)));
    DenseMatrix w = rembed::pca_feature_embed(data, 6, exact_cfg(6, 0, 1, 2));
    REQUIRE(rembed::orthonormality_defect(w) < 1e-10);

    DenseMatrix xc = x.to_dense();
    for (std::size_t j = 0; j < 6; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < 25; ++i) mean += xc(i, j);
        mean /= 25.0;
        for (std::size_t i = 0; i < 25; ++i) xc(i, j) -= mean;
    }
    DenseMatrix recon = testsupport::ref_matmul(testsupport::ref_matmul(xc, w),
                                                rembed::transpose(w));
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < 25 * 6; ++i) {
        const double dv = recon.values()[i] - xc.values()[i];
        num += dv * dv;
        den += xc.values()[i] * xc.values()[i];
    }
    REQUIRE(std::sqrt(num / den) < 1e-8);

    REQUIRE_THROWS_AS(rembed::pca_feature_embed(data, 7, exact_cfg(7, 0, 1, 2)),
                      rembed::DimensionError);
}

TEST_CASE("embedding_regressor with identity features returns projected labels", "[embed]") {
    SeededRng rng(3003);
    const std::size_t n = 12, c = 5, k = 2;
    SparseMatrix y = planted_labels(n, c, {2.0, 1.0, 0.4}, rng);
    Dataset data(SparseMatrix::identity(n), y);
    Embedding emb = rembed::cs_embed(c, k, 4);
    rembed::SolverConfig solver;
    solver.ridge_lambda = 0.0;
    DenseMatrix z = rembed::embedding_regressor(data, emb, solver);
    DenseMatrix yv = spmm(y, emb.v);
    REQUIRE(testsupport::ref_max_abs_diff(z, yv) < 1e-10);
}

TEST_CASE("identity embedding reduces the regressor to raw least squares", "[embed]") {
    SeededRng rng(404);
    SparseMatrix x = testsupport::random_sparse(30, 6, 3, rng);
    SparseMatrix y = testsupport::random_sparse(30, 4, 2, rng);
    Dataset data(std::move(x), std::move(y));
    Embedding emb;
    emb.v = DenseMatrix::identity(4);
    emb.sigma.assign(4, 1.0);
    rembed::SolverConfig solver;
    solver.ridge_lambda = 1e-3;
    solver.tol = 1e-12;
    DenseMatrix z = rembed::embedding_regressor(data, emb, solver);
    DenseMatrix z_ref =
        testsupport::ref_ridge_normal_equations(data.x.to_dense(), data.y.to_dense(), 1e-3);
    REQUIRE(testsupport::ref_max_abs_diff(z, z_ref) < 1e-8);

    Embedding wrong = rembed::cs_embed(5, 2, 0);
    REQUIRE_THROWS_AS(rembed::embedding_regressor(data, wrong, solver),
                      rembed::DimensionError);
}

TEST_CASE("oracle embedding attains the rank-constrained optimum", "[embed]") {
    SeededRng rng(515);
    for (int trial = 0; trial < 3; ++trial) {
        const std::size_t n = 25, d = 6, c = 7, k = 2;
        SparseMatrix x = testsupport::random_sparse(n, d, 4, rng);
        SparseMatrix y = testsupport::random_sparse(n, c, 2, rng);
        Dataset data(std::move(x), std::move(y));

        Embedding emb = rembed::exact_oracle(data, k);
        rembed::SolverConfig solver;
        solver.ridge_lambda = 0.0;
        solver.tol = 1e-12;
        DenseMatrix z = rembed::embedding_regressor(data, emb, solver);
        DenseMatrix xz = spmm(data.x, z);
        DenseMatrix fit = testsupport::ref_matmul(xz, rembed::transpose(emb.v));
        DenseMatrix yd = data.y.to_dense();
        double obj = 0.0;
        for (std::size_t i = 0; i < n * c; ++i) {
            const double dv = yd.values()[i] - fit.values()[i];
            obj += dv * dv;
        }

        // Brute force: unconstrained dense fit, then the best rank-k
        // truncation of the fitted scores.
        DenseMatrix w_star =
            testsupport::ref_ridge_normal_equations(data.x.to_dense(), yd, 0.0);
        DenseMatrix a = testsupport::ref_matmul(data.x.to_dense(), w_star);
        rembed::SvdResult s = rembed::svd_jacobi(a);
        double opt = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < c; ++j) {
                double ak = 0.0;
                for (std::size_t t = 0; t < k; ++t) ak += s.u(i, t) * s.sigma[t] * s.v(j, t);
                const double dv = yd(i, j) - ak;
                opt += dv * dv;
            }
        }
        REQUIRE(obj == Catch::Approx(opt).epsilon(1e-8));
        REQUIRE(obj >= opt * (1.0 - 1e-10));  // never beats the true optimum
    }
}

TEST_CASE("label row normalization changes only the row scales", "[embed]") {
    SeededRng rng(27);
    SparseMatrix y = testsupport::random_sparse(10, 4, 2, rng);
    SparseMatrix yn = rembed::l2_normalize_rows(y);
    for (std::size_t r = 0; r < 10; ++r) {
        double s = 0.0;
        for (std::size_t i = yn.row_offsets()[r]; i < yn.row_offsets()[r + 1]; ++i) {
            s += yn.values()[i] * yn.values()[i];
        }
        REQUIRE(s == Catch::Approx(1.0).epsilon(1e-12));
    }
    REQUIRE(yn.col_indices() == y.col_indices());

    // The flag routes through rembrandt_embed and changes the result.
    auto inst = testsupport::make_gapped_instance(30, 10, 7, 2, 13);
    EmbedConfig cfg = exact_cfg(2, 5, 2, 1);
    Embedding raw = rembed::rembrandt_embed(inst.data, cfg);
    cfg.normalize_labels = true;
    Embedding normed = rembed::rembrandt_embed(inst.data, cfg);
    REQUIRE(raw.v.values() != normed.v.values());
}

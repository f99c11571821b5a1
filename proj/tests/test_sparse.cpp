#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <vector>

#include "rembed/core/sparse_matrix.hpp"
#include "support/oracles.hpp"

using rembed::DenseMatrix;
using rembed::SparseMatrix;
using rembed::spmm;
using rembed::spmm_t;

TEST_CASE("sparse invariants are enforced at construction", "[core]") {
    // valid 2x3 with entries (0,1)=2, (1,0)=3
    REQUIRE_NOTHROW(SparseMatrix(2, 3, {0, 1, 2}, {1, 0}, {2.0, 3.0}));
    // offsets wrong length
    REQUIRE_THROWS_AS(SparseMatrix(2, 3, {0, 1}, {1}, {2.0}), rembed::ValidationError);
    // column out of range
    REQUIRE_THROWS_AS(SparseMatrix(2, 3, {0, 1, 1}, {3}, {2.0}), rembed::IndexError);
    // non-increasing columns within a row
    REQUIRE_THROWS_AS(SparseMatrix(1, 3, {0, 2}, {1, 1}, {2.0, 3.0}), rembed::ValidationError);
    // stored zero
    REQUIRE_THROWS_AS(SparseMatrix(1, 3, {0, 1}, {1}, {0.0}), rembed::ValidationError);
    // decreasing offsets
    REQUIRE_THROWS_AS(SparseMatrix(2, 3, {0, 2, 1}, {0, 1}, {1.0, 1.0}),
                      rembed::ValidationError);
}

TEST_CASE("from_triplets sorts, sums duplicates and drops cancelled entries", "[core]") {
    SparseMatrix a = SparseMatrix::from_triplets(
        2, 3, {{1, 2, 4.0}, {0, 1, 1.5}, {0, 1, 2.5}, {1, 0, 1.0}, {1, 0, -1.0}});
    REQUIRE(a.nnz() == 2);
    REQUIRE(a.row_offsets() == std::vector<std::size_t>{0, 1, 2});
    REQUIRE(a.col_indices() == std::vector<std::size_t>{1, 2});
    REQUIRE(a.values() == std::vector<double>{4.0, 4.0});

    REQUIRE_THROWS_AS(SparseMatrix::from_triplets(2, 3, {{2, 0, 1.0}}), rembed::IndexError);
}

TEST_CASE("spmm identity and hand arithmetic", "[core]") {
    DenseMatrix b = DenseMatrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
    SparseMatrix eye = SparseMatrix::identity(3);
    REQUIRE(testsupport::ref_max_abs_diff(spmm(eye, b), b) == 0.0);

    SparseMatrix row = SparseMatrix::from_triplets(1, 3, {{0, 1, 2.0}});
    DenseMatrix v = DenseMatrix::from_rows({{1}, {5}, {9}});
    DenseMatrix r = spmm(row, v);
    REQUIRE(r.rows() == 1);
    REQUIRE(r(0, 0) == 10.0);

    REQUIRE_THROWS_AS(spmm(row, DenseMatrix(2, 2)), rembed::DimensionError);
}

TEST_CASE("spmm_t identity and hand arithmetic", "[core]") {
    DenseMatrix b = DenseMatrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
    SparseMatrix eye = SparseMatrix::identity(3);
    REQUIRE(testsupport::ref_max_abs_diff(spmm_t(eye, b), b) == 0.0);

    SparseMatrix a = SparseMatrix::from_triplets(2, 3, {{0, 2, 4.0}});
    DenseMatrix u = DenseMatrix::from_rows({{3}, {5}});
    DenseMatrix r = spmm_t(a, u);
    REQUIRE(r.rows() == 3);
    REQUIRE(r(0, 0) == 0.0);
    REQUIRE(r(1, 0) == 0.0);
    REQUIRE(r(2, 0) == 12.0);

    REQUIRE_THROWS_AS(spmm_t(a, DenseMatrix(3, 1)), rembed::DimensionError);
}

TEST_CASE("sparse products agree with the dense reference on random instances", "[core]") {
    rembed::SeededRng rng(71);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 1 + rng.uniform_below(64);
        const std::size_t d = 1 + rng.uniform_below(64);
        const std::size_t w = 1 + rng.uniform_below(8);
        const std::size_t per_row = 1 + rng.uniform_below(std::min<std::size_t>(d, 6));
        SparseMatrix a = testsupport::random_sparse(n, d, per_row, rng);
        DenseMatrix ad = a.to_dense();
        DenseMatrix b = rembed::randn(d, w, rng);
        DenseMatrix c = rembed::randn(n, w, rng);
        REQUIRE(testsupport::ref_max_abs_diff(spmm(a, b), testsupport::ref_matmul(ad, b)) <
                1e-12);
        REQUIRE(testsupport::ref_max_abs_diff(spmm_t(a, c),
                                              testsupport::ref_matmul(ad, c, true)) < 1e-12);
    }
}

TEST_CASE("spmm roundtrips through to_dense on a 50x20 instance", "[core]") {
    rembed::SeededRng rng(7);
    SparseMatrix a = testsupport::random_sparse(50, 20, 2, rng);  // ~10% density
    DenseMatrix b = rembed::randn(20, 3, rng);
    DenseMatrix ref = testsupport::ref_matmul(a.to_dense(), b);
    REQUIRE(testsupport::ref_max_abs_diff(spmm(a, b), ref) < 1e-12);
}

namespace {

double median_spmm_seconds(const SparseMatrix& a, const DenseMatrix& b, int reps) {
    std::vector<double> times;
    volatile double sink = 0.0;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        DenseMatrix c = spmm(a, b);
        const auto t1 = std::chrono::steady_clock::now();
        sink = sink + c(0, 0);
        times.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

}  // namespace

TEST_CASE("spmm runtime grows linearly with nnz", "[timing]") {
    rembed::SeededRng rng(123);
    const std::size_t n = 20000, d = 5000, w = 32;
    SparseMatrix a1 = testsupport::random_sparse(n, d, 30, rng);
    SparseMatrix a2 = testsupport::random_sparse(n, d, 60, rng);
    DenseMatrix b = rembed::randn(d, w, rng);
    (void)spmm(a2, b);  // warm-up
    const double t1 = median_spmm_seconds(a1, b, 5);
    const double t2 = median_spmm_seconds(a2, b, 5);
    const double factor = t2 / t1;
    INFO("t(nnz) = " << t1 << "s, t(2nnz) = " << t2 << "s, factor = " << factor);
    REQUIRE(factor >= 1.5);
    REQUIRE(factor <= 3.0);
}

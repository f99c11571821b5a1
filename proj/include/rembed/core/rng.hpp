#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>

#include "rembed/core/dense_matrix.hpp"
#include "rembed/core/error.hpp"

namespace rembed {

/// Seeded random stream with a pinned, versioned algorithm so that
/// "same seed => same embedding" holds across runs and platforms.
///
/// Version "mt19937_64/box-muller-v1":
///   - source bits: std::mt19937_64 seeded with the given seed (the
///     engine's output sequence is fixed by the C++ standard);
///   - uniform doubles: u = (x >> 11) * 2^-53 in [0, 1);
///   - normal variates: Box-Muller on one draw pair (x1, x2),
///       u1 = ((x1 >> 11) + 1) * 2^-53   in (0, 1]
///       u2 =  (x2 >> 11)      * 2^-53   in [0, 1)
///       z0 = sqrt(-2 ln u1) * cos(2 pi u2)
///       z1 = sqrt(-2 ln u1) * sin(2 pi u2);
///   - bounded integers: multiply-shift rejection (Lemire) on raw draws.
///
/// No state is cached across calls: every fill_normal consumes whole
/// pairs and discards a trailing z1 when the request length is odd, so
/// each call is a pure function of (engine state at entry, shape).
class SeededRng {
public:
    static constexpr const char* algorithm = "mt19937_64/box-muller-v1";

    explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 significant bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound); bound must be >= 1.
    std::uint64_t uniform_below(std::uint64_t bound) {
        if (bound == 0) throw ValidationError("uniform_below: bound must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % bound;
    }

    /// Fills n doubles with i.i.d. standard normals in index order.
    void fill_normal(double* out, std::size_t n) {
        std::size_t i = 0;
        while (i + 1 < n) {
            auto [z0, z1] = normal_pair();
            out[i++] = z0;
            out[i++] = z1;
        }
        if (i < n) {
            auto [z0, z1] = normal_pair();
            (void)z1;  // discarded by contract
            out[i] = z0;
        }
    }

private:
    std::pair<double, double> normal_pair() {
        const std::uint64_t x1 = engine_();
        const std::uint64_t x2 = engine_();
        const double u1 = static_cast<double>((x1 >> 11) + 1) * 0x1.0p-53;
        const double u2 = static_cast<double>(x2 >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// Gaussian matrix filled in column-major order from the stream.
inline DenseMatrix randn(std::size_t rows, std::size_t cols, SeededRng& rng) {
    if (rows == 0 || cols == 0) {
        throw DimensionError("randn: dimensions must be positive, got " + std::to_string(rows) +
                             "x" + std::to_string(cols));
    }
    DenseMatrix m(rows, cols);
    rng.fill_normal(m.values().data(), rows * cols);
    return m;
}

/// Mixes a stream index into a seed; used to derive independent
/// per-class or per-attempt streams from one root seed (splitmix64
/// finalizer).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace rembed

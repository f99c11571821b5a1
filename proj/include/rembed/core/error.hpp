#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace rembed {

/// Error categories used across the library. Each category maps to a
/// distinct nonzero process exit code in the CLI.
enum class errc {
    dimension = 1,    ///< non-conforming shapes or out-of-range k
    validation,       ///< broken type invariant or precondition
    convergence,      ///< iterative solver exhausted its budget
    rank_deficiency,  ///< surviving rank too small for the requested k
    parse,            ///< malformed text input (svmlight)
    format,           ///< malformed structured file (embedding/model)
    index,            ///< index outside a declared dimension
    size_guard,       ///< refused: input too large for a dense routine
    io                ///< filesystem failure
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::dimension: return "dimension";
        case errc::validation: return "validation";
        case errc::convergence: return "convergence";
        case errc::rank_deficiency: return "rank";
        case errc::parse: return "parse";
        case errc::format: return "format";
        case errc::index: return "index";
        case errc::size_guard: return "size-guard";
        case errc::io: return "io";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    errc code() const noexcept { return code_; }

private:
    errc code_;
};

struct DimensionError : Error {
    explicit DimensionError(const std::string& msg) : Error(errc::dimension, msg) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& msg) : Error(errc::validation, msg) {}
};

/// Carries the final gradient and residual norms so callers can report
/// how far the solve got before the iteration budget ran out.
struct ConvergenceError : Error {
    ConvergenceError(const std::string& msg, double gradient_norm, double residual_norm,
                     std::size_t iterations)
        : Error(errc::convergence, msg),
          gradient_norm(gradient_norm),
          residual_norm(residual_norm),
          iterations(iterations) {}

    double gradient_norm;
    double residual_norm;
    std::size_t iterations;
};

struct RankError : Error {
    RankError(const std::string& msg, std::size_t achievable_k)
        : Error(errc::rank_deficiency, msg), achievable_k(achievable_k) {}

    std::size_t achievable_k;
};

struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t line)
        : Error(errc::parse, msg + " (line " + std::to_string(line) + ")"), line(line) {}

    std::size_t line;
};

struct FormatError : Error {
    explicit FormatError(const std::string& msg) : Error(errc::format, msg) {}
};

struct IndexError : Error {
    explicit IndexError(const std::string& msg) : Error(errc::index, msg) {}
};

struct SizeGuardError : Error {
    explicit SizeGuardError(const std::string& msg) : Error(errc::size_guard, msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(errc::io, msg) {}
};

/// Warnings (oversampling clamps, near-orthonormality on load, skipped
/// evaluation rows) go through this hook. Default prints to stderr;
/// tests may swap it out to capture or silence.
using warning_handler = void (*)(const std::string&);

namespace detail {
inline warning_handler& warning_sink() {
    static warning_handler h = nullptr;
    return h;
}
}  // namespace detail

inline void set_warning_handler(warning_handler h) { detail::warning_sink() = h; }

inline void warn(const std::string& msg) {
    if (detail::warning_sink()) {
        detail::warning_sink()(msg);
    } else {
        std::fprintf(stderr, "rembed: warning: %s\n", msg.c_str());
    }
}

}  // namespace rembed

#pragma once

#include <cerrno>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "rembed/core/error.hpp"
#include "rembed/embed/embedding.hpp"

namespace rembed {

namespace detail {

inline std::string next_token(std::istream& in, const char* what) {
    std::string tok;
    if (!(in >> tok)) throw FormatError(std::string("embedding file: missing ") + what);
    return tok;
}

inline double strict_double(std::istream& in, const char* what) {
    const std::string tok = next_token(in, what);
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || !std::isfinite(v)) {
        throw FormatError(std::string("embedding file: malformed ") + what + " '" + tok + "'");
    }
    return v;
}

inline std::size_t strict_size(std::istream& in, const char* what) {
    const std::string tok = next_token(in, what);
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
    if (errno != 0 || end != tok.c_str() + tok.size() || tok.empty() ||
        !std::isdigit(static_cast<unsigned char>(tok[0]))) {
        throw FormatError(std::string("embedding file: malformed ") + what + " '" + tok + "'");
    }
    return static_cast<std::size_t>(v);
}

}  // namespace detail

/// Text format, one matrix row per line, 17 significant digits so
/// binary64 values survive a save/load round trip bitwise:
///
///   REMBED v1 <c> <k>
///   <sigma_1> ... <sigma_k>
///   <v_11> ... <v_1k>
///   ...
///   <v_c1> ... <v_ck>
inline void write_embedding(const Embedding& emb, std::ostream& out) {
    const std::size_t c = emb.v.rows();
    const std::size_t k = emb.v.cols();
    char buf[64];
    out << "REMBED v1 " << c << ' ' << k << '\n';
    for (std::size_t j = 0; j < k; ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", emb.sigma[j]);
        out << (j == 0 ? "" : " ") << buf;
    }
    out << '\n';
    for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", emb.v(i, j));
            out << (j == 0 ? "" : " ") << buf;
        }
        out << '\n';
    }
}

inline Embedding read_embedding(std::istream& in) {
    if (detail::next_token(in, "magic") != "REMBED") {
        throw FormatError("embedding file: bad magic, expected REMBED");
    }
    if (detail::next_token(in, "version") != "v1") {
        throw FormatError("embedding file: unsupported version");
    }
    const std::size_t c = detail::strict_size(in, "class count");
    const std::size_t k = detail::strict_size(in, "embedding dimension");
    if (c == 0 || k == 0) throw FormatError("embedding file: zero dimension in header");

    Embedding emb;
    emb.sigma.resize(k);
    for (std::size_t j = 0; j < k; ++j) emb.sigma[j] = detail::strict_double(in, "sigma value");
    emb.v = DenseMatrix(c, k);
    for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            emb.v(i, j) = detail::strict_double(in, "matrix value");
        }
    }
    std::string trailing;
    if (in >> trailing) {
        throw FormatError("embedding file: trailing data '" + trailing + "'");
    }
    const double defect = orthonormality_defect(emb.v);
    if (defect > 1e-6) {
        warn("loaded embedding columns deviate from orthonormality by " +
             std::to_string(defect));
    }
    return emb;
}

inline void save_embedding(const Embedding& emb, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_embedding(emb, out);
    out.flush();
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline Embedding load_embedding(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return read_embedding(in);
}

}  // namespace rembed

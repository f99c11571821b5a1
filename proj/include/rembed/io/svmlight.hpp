#pragma once

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "rembed/core/error.hpp"
#include "rembed/embed/dataset.hpp"

namespace rembed {

/// Dialect knobs for the multilabel svmlight text format. A base of 0
/// or 1 covers every dialect in circulation. `features`/`classes` of 0
/// means "infer as max index + 1"; a nonzero value declares the
/// dimension, and any index at or above it is rejected.
struct SvmlightOptions {
    std::size_t labels_base = 0;
    std::size_t features_base = 1;
    std::size_t features = 0;
    std::size_t classes = 0;
};

namespace detail {

inline std::size_t parse_index_token(const std::string& tok, std::size_t base, const char* what,
                                     std::size_t line) {
    if (tok.empty() || !std::isdigit(static_cast<unsigned char>(tok[0]))) {
        throw ParseError(std::string("malformed ") + what + " '" + tok + "'", line);
    }
    errno = 0;
    char* end = nullptr;
    const unsigned long long raw = std::strtoull(tok.c_str(), &end, 10);
    if (errno != 0 || end != tok.c_str() + tok.size()) {
        throw ParseError(std::string("malformed ") + what + " '" + tok + "'", line);
    }
    if (raw < base) {
        throw ParseError(std::string(what) + " '" + tok + "' below index base " +
                             std::to_string(base),
                         line);
    }
    return static_cast<std::size_t>(raw - base);
}

inline double parse_value_token(const std::string& tok, std::size_t line) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || end != tok.c_str() + tok.size() || !std::isfinite(v)) {
        throw ParseError("svmlight: malformed value '" + tok + "'", line);
    }
    return v;
}

}  // namespace detail

/// Parses multilabel svmlight text: each example is one line of the
/// form `label[,label...] idx:val [idx:val...]`. Blank lines and lines
/// starting with `#` are skipped. Duplicate feature indices within a
/// line are summed; duplicate labels collapse to a single indicator.
inline Dataset parse_svmlight(std::istream& in, const SvmlightOptions& opts = {}) {
    std::vector<std::tuple<std::size_t, std::size_t, double>> xt;
    std::vector<std::tuple<std::size_t, std::size_t, double>> yt;
    std::size_t rows = 0;
    std::size_t max_feature = 0;
    std::size_t max_label = 0;
    bool any_feature = false;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;

        std::vector<std::string> tokens;
        while (start < line.size()) {
            std::size_t stop = line.find_first_of(" \t\r", start);
            if (stop == std::string::npos) stop = line.size();
            tokens.emplace_back(line.substr(start, stop - start));
            start = line.find_first_not_of(" \t\r", stop);
            if (start == std::string::npos) break;
        }

        if (tokens[0].find(':') != std::string::npos) {
            throw ParseError("svmlight: example has no labels", lineno);
        }
        const std::size_t row = rows++;

        std::size_t pos = 0;
        std::vector<std::size_t> labels;
        const std::string& head = tokens[0];
        while (pos <= head.size()) {
            std::size_t comma = head.find(',', pos);
            if (comma == std::string::npos) comma = head.size();
            labels.push_back(
                detail::parse_index_token(head.substr(pos, comma - pos), opts.labels_base,
                                          "label", lineno));
            pos = comma + 1;
        }
        std::sort(labels.begin(), labels.end());
        labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
        for (std::size_t lbl : labels) {
            if (opts.classes != 0 && lbl >= opts.classes) {
                throw IndexError("svmlight: label " + std::to_string(lbl + opts.labels_base) +
                                 " outside declared class count " + std::to_string(opts.classes) +
                                 " (line " + std::to_string(lineno) + ")");
            }
            max_label = std::max(max_label, lbl);
            yt.emplace_back(row, lbl, 1.0);
        }

        std::map<std::size_t, double> feats;
        for (std::size_t t = 1; t < tokens.size(); ++t) {
            const std::string& tok = tokens[t];
            const std::size_t colon = tok.find(':');
            if (colon == std::string::npos || colon == 0 || colon + 1 >= tok.size()) {
                throw ParseError("svmlight: malformed feature '" + tok + "'", lineno);
            }
            const std::size_t idx = detail::parse_index_token(
                tok.substr(0, colon), opts.features_base, "feature index", lineno);
            const double val = detail::parse_value_token(tok.substr(colon + 1), lineno);
            if (opts.features != 0 && idx >= opts.features) {
                throw IndexError("svmlight: feature index " +
                                 std::to_string(idx + opts.features_base) +
                                 " outside declared dimension " + std::to_string(opts.features) +
                                 " (line " + std::to_string(lineno) + ")");
            }
            feats[idx] += val;
        }
        // Entries that are (or sum to) exact zero are dropped before
        // dimension inference so the canonical form reparses identically.
        for (const auto& [idx, val] : feats) {
            if (val == 0.0) continue;
            any_feature = true;
            max_feature = std::max(max_feature, idx);
            xt.emplace_back(row, idx, val);
        }
    }
    if (rows == 0) throw ParseError("svmlight: no examples", lineno);

    const std::size_t d = opts.features != 0 ? opts.features : (any_feature ? max_feature + 1 : 0);
    const std::size_t c = opts.classes != 0 ? opts.classes : max_label + 1;
    return Dataset(SparseMatrix::from_triplets(rows, d, std::move(xt)),
                   SparseMatrix::from_triplets(rows, c, std::move(yt)));
}

inline Dataset load_svmlight(const std::string& path, const SvmlightOptions& opts = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return parse_svmlight(in, opts);
}

/// Canonical serialization: sorted indices, duplicates already summed
/// by the CSR form, values at 17 significant digits.
inline void write_svmlight(const Dataset& data, std::ostream& out,
                           const SvmlightOptions& opts = {}) {
    char buf[64];
    for (std::size_t i = 0; i < data.n(); ++i) {
        for (std::size_t t = data.y.row_offsets()[i]; t < data.y.row_offsets()[i + 1]; ++t) {
            if (t > data.y.row_offsets()[i]) out << ',';
            out << data.y.col_indices()[t] + opts.labels_base;
        }
        for (std::size_t t = data.x.row_offsets()[i]; t < data.x.row_offsets()[i + 1]; ++t) {
            std::snprintf(buf, sizeof(buf), "%.17g", data.x.values()[t]);
            out << ' ' << data.x.col_indices()[t] + opts.features_base << ':' << buf;
        }
        out << '\n';
    }
}

inline void save_svmlight(const Dataset& data, const std::string& path,
                          const SvmlightOptions& opts = {}) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_svmlight(data, out, opts);
    out.flush();
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace rembed

#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "rembed/core/error.hpp"
#include "rembed/io/embedding_io.hpp"
#include "rembed/io/svmlight.hpp"
#include "rembed/learn/model.hpp"

namespace rembed {

namespace detail {

inline void write_matrix_block(std::ostream& out, const char* name, const DenseMatrix& m) {
    char buf[64];
    out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            out << (j == 0 ? "" : " ") << buf;
        }
        if (m.cols() > 0) out << '\n';
    }
}

inline DenseMatrix read_matrix_block(std::istream& in, const char* name) {
    if (next_token(in, "block name") != name) {
        throw FormatError(std::string("model file: expected block ") + name);
    }
    const std::size_t rows = strict_size(in, "block rows");
    const std::size_t cols = strict_size(in, "block cols");
    DenseMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = strict_double(in, "matrix value");
    }
    return m;
}

}  // namespace detail

/// Text format mirroring the embedding file: a header line followed by
/// three labeled matrix blocks. Empty matrices serialize as `NAME 0 0`.
///
///   RMODEL v1 <kind>
///   Z <d> <k>      rows of the feature-to-embedding map
///   V <c> <k>      rows of the label embedding
///   HEADS <c> <k+1>  per-class logistic weights + bias, or 0 0
inline void write_model(const TrainedModel& model, std::ostream& out) {
    out << "RMODEL v1 " << model_kind_name(model.kind) << '\n';
    detail::write_matrix_block(out, "Z", model.z);
    detail::write_matrix_block(out, "V", model.v);
    detail::write_matrix_block(out, "HEADS", model.heads);
}

inline TrainedModel read_model(std::istream& in) {
    if (detail::next_token(in, "magic") != "RMODEL") {
        throw FormatError("model file: bad magic, expected RMODEL");
    }
    if (detail::next_token(in, "version") != "v1") {
        throw FormatError("model file: unsupported version");
    }
    const std::string kind = detail::next_token(in, "model kind");
    TrainedModel model;
    if (kind == model_kind_name(ModelKind::inner_product_decoder)) {
        model.kind = ModelKind::inner_product_decoder;
    } else if (kind == model_kind_name(ModelKind::independent_logistic)) {
        model.kind = ModelKind::independent_logistic;
    } else {
        throw FormatError("model file: unknown kind '" + kind + "'");
    }
    model.z = detail::read_matrix_block(in, "Z");
    model.v = detail::read_matrix_block(in, "V");
    model.heads = detail::read_matrix_block(in, "HEADS");
    std::string trailing;
    if (in >> trailing) throw FormatError("model file: trailing data '" + trailing + "'");
    try {
        model.validate();
    } catch (const Error& e) {
        throw FormatError(std::string("model file: inconsistent blocks: ") + e.what());
    }
    return model;
}

inline void save_model(const TrainedModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_model(model, out);
    out.flush();
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline TrainedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return read_model(in);
}

/// Ranked predictions, one line per example: label indices separated
/// by single spaces, highest-scoring first.
inline void write_predictions(const std::vector<std::vector<std::size_t>>& preds,
                              std::ostream& out) {
    for (const auto& row : preds) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            out << (j == 0 ? "" : " ") << row[j];
        }
        out << '\n';
    }
}

inline std::vector<std::vector<std::size_t>> read_predictions(std::istream& in) {
    std::vector<std::vector<std::size_t>> preds;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) {
            throw ParseError("predictions: empty line", lineno);
        }
        std::vector<std::size_t> row;
        while (start < line.size()) {
            std::size_t stop = line.find_first_of(" \t\r", start);
            if (stop == std::string::npos) stop = line.size();
            row.push_back(detail::parse_index_token(line.substr(start, stop - start), 0,
                                                    "prediction", lineno));
            start = line.find_first_not_of(" \t\r", stop);
            if (start == std::string::npos) break;
        }
        preds.push_back(std::move(row));
    }
    if (preds.empty()) throw ParseError("predictions: no lines", lineno);
    return preds;
}

inline void save_predictions(const std::vector<std::vector<std::size_t>>& preds,
                             const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_predictions(preds, out);
    out.flush();
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline std::vector<std::vector<std::size_t>> load_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return read_predictions(in);
}

}  // namespace rembed

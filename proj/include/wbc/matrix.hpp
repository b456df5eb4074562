#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wbc/error.hpp"
#include "wbc/features.hpp"
#include "wbc/forest.hpp"

namespace wbc {

/// The per-sample feature table, column order frozen to the canonical
/// 24 metric names. Any reordering on disk is a schema error.
struct FeatureMatrix {
    std::vector<std::string> source_ids;
    std::vector<FeatureVector> rows;
    std::vector<CellLabel> labels;

    std::size_t size() const { return rows.size(); }
};

namespace detail {

inline std::string matrix_header() {
    std::string h = "source_id,label";
    for (const char* name : kFeatureNames) {
        h += ',';
        h += name;
    }
    return h;
}

}  // namespace detail

inline void save_matrix(const FeatureMatrix& matrix, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open matrix for writing: " + path);
    out << detail::matrix_header() << "\n";
    char buf[40];
    for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
        out << matrix.source_ids[i] << "," << label_name(matrix.labels[i]);
        for (double v : matrix.rows[i]) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << "," << buf;
        }
        out << "\n";
    }
    if (!out) throw Error("failed writing matrix: " + path);
}

inline FeatureMatrix load_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open matrix: " + path);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("matrix file is empty: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != detail::matrix_header())
        throw SchemaError("matrix header mismatch in " + path +
                          " (expected the canonical 24 metric columns)");

    FeatureMatrix matrix;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string field;
        std::istringstream row(line);
        while (std::getline(row, field, ',')) fields.push_back(field);
        if (fields.size() != 2 + kFeatureCount)
            throw SchemaError("matrix row " + std::to_string(line_no) + " has " +
                              std::to_string(fields.size()) + " fields, expected 26");
        FeatureVector features;
        for (std::size_t q = 0; q < kFeatureCount; ++q) {
            try {
                features[q] = std::stod(fields[2 + q]);
            } catch (const std::exception&) {
                throw SchemaError("matrix row " + std::to_string(line_no) +
                                  ": bad number '" + fields[2 + q] + "'");
            }
        }
        matrix.source_ids.push_back(fields[0]);
        matrix.labels.push_back(parse_label(fields[1]));
        matrix.rows.push_back(features);
    }
    return matrix;
}

inline std::vector<Sample> to_samples(const FeatureMatrix& matrix) {
    std::vector<Sample> samples;
    samples.reserve(matrix.size());
    for (std::size_t i = 0; i < matrix.size(); ++i)
        samples.push_back({matrix.rows[i], matrix.labels[i], matrix.source_ids[i]});
    return samples;
}

}  // namespace wbc

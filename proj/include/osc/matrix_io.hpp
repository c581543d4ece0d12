#pragma once

// Data matrices and label files. On disk every row is one point; in memory
// points are columns.

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "osc/csv.hpp"
#include "osc/error.hpp"
#include "osc/owl.hpp"

namespace osc {

namespace detail {

struct PointRows {
    Matrix X;
    std::vector<std::size_t> lines;
};

inline PointRows read_point_rows(const std::filesystem::path& path) {
    const std::string source = path.string();
    const auto records = csv::parse(csv::read_file(path), source);
    if (records.empty()) {
        throw ParseError(source, 1, "no data rows");
    }
    const std::size_t width = records.front().fields.size();
    PointRows out;
    Matrix& X = out.X;
    X.resize(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(records.size()));
    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto& rec = records[r];
        out.lines.push_back(rec.line);
        if (rec.fields.size() != width) {
            throw ParseError(source, rec.line,
                             "expected " + std::to_string(width) + " values, found " + std::to_string(rec.fields.size()));
        }
        for (std::size_t c = 0; c < width; ++c) {
            const double v = csv::parse_double(rec.fields[c], source, rec.line);
            if (!std::isfinite(v)) {
                throw ParseError(source, rec.line, "non-finite value");
            }
            X(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) = v;
        }
    }
    return out;
}

}  // namespace detail

/// Reads a rectangular numeric CSV without normalizing (rows = points).
inline Matrix read_matrix_csv_raw(const std::filesystem::path& path) { return detail::read_point_rows(path).X; }

/// Reads points (one per row) and scales each to unit norm.
inline Matrix read_matrix_csv(const std::filesystem::path& path) {
    auto [X, lines] = detail::read_point_rows(path);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double norm = X.col(j).norm();
        if (norm == 0.0) {
            throw ParseError(path.string(), lines[static_cast<std::size_t>(j)], "zero-norm point");
        }
        X.col(j) /= norm;
    }
    return X;
}

inline std::string matrix_csv_text(const Matrix& X) {
    std::string out;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            if (i > 0) {
                out += ',';
            }
            out += csv::format_double(X(i, j));
        }
        out += '\n';
    }
    return out;
}

inline void write_matrix_csv(const Matrix& X, const std::filesystem::path& path) {
    csv::atomic_write(path, matrix_csv_text(X));
}

inline std::vector<int> read_labels_csv(const std::filesystem::path& path) {
    const std::string source = path.string();
    std::vector<int> labels;
    for (const auto& rec : csv::parse(csv::read_file(path), source)) {
        if (rec.fields.size() != 1) {
            throw ParseError(source, rec.line, "expected one label per row");
        }
        try {
            std::size_t used = 0;
            const int v = std::stoi(rec.fields[0], &used);
            if (used != rec.fields[0].size() || v < 0) {
                throw std::invalid_argument("label");
            }
            labels.push_back(v);
        } catch (const std::exception&) {
            throw ParseError(source, rec.line, "invalid label '" + rec.fields[0] + "'");
        }
    }
    return labels;
}

inline void write_labels_csv(const std::vector<int>& labels, const std::filesystem::path& path) {
    std::string out;
    for (const int l : labels) {
        out += std::to_string(l);
        out += '\n';
    }
    csv::atomic_write(path, out);
}

}  // namespace osc

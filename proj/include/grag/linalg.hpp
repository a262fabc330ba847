// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "grag/error.hpp"

namespace grag {

// Row-major dense matrix. Dimensions in this project are small (feature
// widths, vocab sizes), so plain loops are the whole story.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    bool operator==(const Matrix&) const = default;
};

// y = M * x + b. Accumulation runs left to right over columns, which keeps
// results reproducible.
inline std::vector<double> affine(const Matrix& m, const std::vector<double>& x,
                                  const std::vector<double>& b) {
    if (x.size() != m.cols)
        raise(ErrorCode::DimMismatch,
              "affine: vector width " + std::to_string(x.size()) +
                  " does not match matrix columns " + std::to_string(m.cols));
    if (b.size() != m.rows)
        raise(ErrorCode::DimMismatch, "affine: bias width does not match matrix rows");
    std::vector<double> y(m.rows, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        double acc = 0.0;
        const double* row = m.data.data() + r * m.cols;
        for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * x[c];
        y[r] = acc + b[r];
    }
    return y;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double norm2(const std::vector<double>& a) {
    double acc = 0.0;
    for (double v : a) acc += v * v;
    return std::sqrt(acc);
}

inline bool all_finite(const std::vector<double>& a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

} // namespace grag

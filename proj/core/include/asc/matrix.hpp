#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace asc {

// Dense row-major matrix of doubles. Time-frequency features store frames
// as rows (T) and mel bins as columns (M).
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> v;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), v(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }

    const double* row(std::size_t r) const { return v.data() + r * cols; }
    double* row(std::size_t r) { return v.data() + r * cols; }

    std::size_t size() const { return v.size(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

// A log-Mel feature image: rows = time frames (T), cols = mel bins (M).
using LogMelImage = Matrix;

}  // namespace asc

// SPDX-License-Identifier: Apache-2.0
//
// Minimal dense row-major matrix used throughout the pipeline. All maps,
// echoes and weight matrices are small enough that a flat std::vector is
// both the simplest and the fastest representation here.

#ifndef TWR_MATRIX_HPP
#define TWR_MATRIX_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "twr/common.hpp"

namespace twr {

template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    T* row(std::size_t i) { return data_.data() + i * cols_; }
    const T* row(std::size_t i) const { return data_.data() + i * cols_; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& storage() { return data_; }
    const std::vector<T>& storage() const { return data_; }

    bool operator==(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<T> data_;
};

using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<std::complex<double>>;

inline double matrix_min(const RealMatrix& m) {
    return *std::min_element(m.storage().begin(), m.storage().end());
}

inline double matrix_max(const RealMatrix& m) {
    return *std::max_element(m.storage().begin(), m.storage().end());
}

inline bool all_finite(const RealMatrix& m) {
    for (double v : m.storage())
        if (!std::isfinite(v)) return false;
    return true;
}

inline double frobenius_norm(const RealMatrix& m) {
    double s = 0.0;
    for (double v : m.storage()) s += v * v;
    return std::sqrt(s);
}

/// Linear interpolation of a row-major matrix at fractional (ri, cj).
inline double bilinear_at(const RealMatrix& m, double ri, double cj) {
    const std::size_t r = m.rows(), c = m.cols();
    ri = std::min(std::max(ri, 0.0), static_cast<double>(r - 1));
    cj = std::min(std::max(cj, 0.0), static_cast<double>(c - 1));
    const std::size_t i0 = static_cast<std::size_t>(ri);
    const std::size_t j0 = static_cast<std::size_t>(cj);
    const std::size_t i1 = std::min(i0 + 1, r - 1);
    const std::size_t j1 = std::min(j0 + 1, c - 1);
    const double fi = ri - static_cast<double>(i0);
    const double fj = cj - static_cast<double>(j0);
    const double top = m(i0, j0) * (1.0 - fj) + m(i0, j1) * fj;
    const double bot = m(i1, j0) * (1.0 - fj) + m(i1, j1) * fj;
    return top * (1.0 - fi) + bot * fi;
}

/// Separable linear resampling onto an out_rows x out_cols grid.
inline RealMatrix resize_bilinear(const RealMatrix& m, std::size_t out_rows, std::size_t out_cols) {
    if (m.empty()) throw DataError("resize_bilinear: empty matrix");
    RealMatrix out(out_rows, out_cols);
    const double rstep = out_rows > 1 ? double(m.rows() - 1) / double(out_rows - 1) : 0.0;
    const double cstep = out_cols > 1 ? double(m.cols() - 1) / double(out_cols - 1) : 0.0;
    for (std::size_t i = 0; i < out_rows; ++i)
        for (std::size_t j = 0; j < out_cols; ++j)
            out(i, j) = bilinear_at(m, i * rstep, j * cstep);
    return out;
}

namespace detail {

/// Overlap weights of output cell `i` (of `n_out`) against source cells.
inline void area_weights(std::size_t n_in, std::size_t n_out, std::size_t i,
                         std::size_t& first, std::vector<double>& w) {
    const double scale = double(n_in) / double(n_out);
    const double lo = double(i) * scale;
    const double hi = double(i + 1) * scale;
    first = std::size_t(lo);
    const std::size_t last = std::min(n_in - 1, std::size_t(hi - 1e-12));
    w.clear();
    for (std::size_t s = first; s <= last; ++s) {
        const double cell_lo = std::max(lo, double(s));
        const double cell_hi = std::min(hi, double(s + 1));
        w.push_back(std::max(0.0, cell_hi - cell_lo) / (hi - lo));
    }
}

}  // namespace detail

/// Area-averaged (anti-aliased) downsampling; falls back to bilinear
/// whenever an axis would be upsampled.
inline RealMatrix resize_area(const RealMatrix& m, std::size_t out_rows, std::size_t out_cols) {
    if (m.empty()) throw DataError("resize_area: empty matrix");
    if (m.rows() < out_rows || m.cols() < out_cols)
        return resize_bilinear(m, out_rows, out_cols);
    RealMatrix out(out_rows, out_cols);
    std::vector<double> wr, wc;
    for (std::size_t i = 0; i < out_rows; ++i) {
        std::size_t r0 = 0;
        detail::area_weights(m.rows(), out_rows, i, r0, wr);
        for (std::size_t j = 0; j < out_cols; ++j) {
            std::size_t c0 = 0;
            detail::area_weights(m.cols(), out_cols, j, c0, wc);
            double acc = 0.0;
            for (std::size_t a = 0; a < wr.size(); ++a)
                for (std::size_t b = 0; b < wc.size(); ++b)
                    acc += wr[a] * wc[b] * m(r0 + a, c0 + b);
            out(i, j) = acc;
        }
    }
    return out;
}

}  // namespace twr

#endif  // TWR_MATRIX_HPP

#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <vector>

namespace circuitgraph {

/// Dense row-major matrix of doubles. Deliberately minimal: the classifier
/// kernels only need resize/fill, element access and a few product shapes.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(int r, int c) {
        assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
        return data_[static_cast<std::size_t>(r) * cols_ + c];
    }
    double operator()(int r, int c) const {
        assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
        return data_[static_cast<std::size_t>(r) * cols_ + c];
    }

    double* row(int r) { return data_.data() + static_cast<std::size_t>(r) * cols_; }
    const double* row(int r) const { return data_.data() + static_cast<std::size_t>(r) * cols_; }

    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    /// Resizes without preserving contents. Keeps capacity when shrinking, so
    /// per-sample work buffers stop allocating once warmed up.
    void resize(int rows, int cols) {
        rows_ = rows;
        cols_ = cols;
        data_.resize(static_cast<std::size_t>(rows) * cols);
    }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }
    friend bool operator!=(const Matrix& a, const Matrix& b) { return !(a == b); }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

/// out = a * b. Accumulates along k in ascending order (fixed summation order,
/// so results are reproducible). Zero entries of `a` are skipped; adding
/// 0 * x contributes exactly +0.0, so skipping never changes finite results,
/// and graph propagation matrices are mostly zeros.
inline void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
    assert(a.cols() == b.rows());
    const int m = a.rows(), k = a.cols(), n = b.cols();
    out.resize(m, n);
    for (int i = 0; i < m; ++i) {
        double* oi = out.row(i);
        std::fill(oi, oi + n, 0.0);
        const double* ai = a.row(i);
        for (int p = 0; p < k; ++p) {
            const double av = ai[p];
            if (av == 0.0) continue;
            const double* bp = b.row(p);
            for (int j = 0; j < n; ++j) oi[j] += av * bp[j];
        }
    }
}

/// out = a^T * b, accumulated row-by-row over the shared leading dimension.
inline void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out) {
    assert(a.rows() == b.rows());
    const int n = a.rows(), p = a.cols(), q = b.cols();
    out.resize(p, q);
    out.fill(0.0);
    for (int i = 0; i < n; ++i) {
        const double* ai = a.row(i);
        const double* bi = b.row(i);
        for (int r = 0; r < p; ++r) {
            const double av = ai[r];
            if (av == 0.0) continue;
            double* orow = out.row(r);
            for (int c = 0; c < q; ++c) orow[c] += av * bi[c];
        }
    }
}

/// out = a * b^T. Each output entry is a dot product of two contiguous rows.
inline void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out) {
    assert(a.cols() == b.cols());
    const int m = a.rows(), p = b.rows(), k = a.cols();
    out.resize(m, p);
    for (int i = 0; i < m; ++i) {
        const double* ai = a.row(i);
        double* oi = out.row(i);
        for (int j = 0; j < p; ++j) {
            const double* bj = b.row(j);
            double acc = 0.0;
            for (int c = 0; c < k; ++c) acc += ai[c] * bj[c];
            oi[j] = acc;
        }
    }
}

} // namespace circuitgraph

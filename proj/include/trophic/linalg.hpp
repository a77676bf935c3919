#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace trophic {

/// Minimal row-major dense matrix used for readouts, feedback
/// projections and input maps. Heavy lifting stays in BlockSparseMatrix;
/// this type only needs matvec-style products and norms.
struct DenseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    DenseMatrix() = default;
    DenseMatrix(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }

    // y = A x
    void matvec(std::span<const double> x, std::span<double> y) const {
        if (static_cast<int>(x.size()) != cols || static_cast<int>(y.size()) != rows)
            throw std::invalid_argument("DenseMatrix::matvec: dimension mismatch");
        for (int r = 0; r < rows; ++r) {
            double acc = 0.0;
            const double* row = v.data() + static_cast<std::size_t>(r) * cols;
            for (int c = 0; c < cols; ++c) acc += row[c] * x[c];
            y[r] = acc;
        }
    }

    // y = A^T x
    void matvec_transpose(std::span<const double> x, std::span<double> y) const {
        if (static_cast<int>(x.size()) != rows || static_cast<int>(y.size()) != cols)
            throw std::invalid_argument("DenseMatrix::matvec_transpose: dimension mismatch");
        for (int c = 0; c < cols; ++c) y[c] = 0.0;
        for (int r = 0; r < rows; ++r) {
            const double xr = x[r];
            const double* row = v.data() + static_cast<std::size_t>(r) * cols;
            for (int c = 0; c < cols; ++c) y[c] += row[c] * xr;
        }
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (double e : v) s += e * e;
        return std::sqrt(s);
    }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline double mean(std::span<const double> a) {
    if (a.empty()) return 0.0;
    double s = 0.0;
    for (double e : a) s += e;
    return s / static_cast<double>(a.size());
}

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    const double na = norm2(a), nb = norm2(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

inline bool all_finite(std::span<const double> a) {
    for (double e : a)
        if (!std::isfinite(e)) return false;
    return true;
}

} // namespace trophic

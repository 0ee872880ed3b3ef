#pragma once

// Reference computations used only by the test suites. Each one is written
// independently of the library routine it is compared against.

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <utility>
#include <vector>

#include "janus/matrix.hpp"

namespace janus {

/// Readable failure output for GoogleTest.
inline void PrintTo(const Matrix& m, std::ostream* os) {
    *os << m.shape_string() << " [";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        *os << (i ? "; " : "");
        for (std::size_t j = 0; j < m.cols(); ++j) *os << (j ? " " : "") << m(i, j);
    }
    *os << "]";
}

}  // namespace janus

namespace janus::oracle {

/// Textbook i-j-k triple loop.
inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
            c(i, j) = acc;
        }
    return c;
}

inline Matrix naive_transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

inline double sum_of_squares(const Matrix& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * a(i, j);
    return acc;
}

/// Gaussian elimination with partial pivoting for a general square system.
inline Matrix dense_solve(Matrix a, Matrix b) {
    const std::size_t n = a.rows();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
            for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(col, j), b(piv, j));
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
            for (std::size_t j = 0; j < b.cols(); ++j) b(r, j) -= f * b(col, j);
        }
    }
    Matrix x(n, b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j)
        for (std::size_t i = n; i-- > 0;) {
            double acc = b(i, j);
            for (std::size_t k = i + 1; k < n; ++k) acc -= a(i, k) * x(k, j);
            x(i, j) = acc / a(i, i);
        }
    return x;
}

/// Central finite-difference gradient of a scalar function of one matrix.
inline Matrix central_difference(const std::function<double(const Matrix&)>& f, const Matrix& at, double h = 1e-6) {
    Matrix grad(at.rows(), at.cols());
    Matrix probe = at;
    for (std::size_t i = 0; i < at.rows(); ++i)
        for (std::size_t j = 0; j < at.cols(); ++j) {
            const double orig = probe(i, j);
            probe(i, j) = orig + h;
            const double up = f(probe);
            probe(i, j) = orig - h;
            const double down = f(probe);
            probe(i, j) = orig;
            grad(i, j) = (up - down) / (2.0 * h);
        }
    return grad;
}

/// ||a - b|| / max(||a||, ||b||, floor).
inline double relative_error(const Matrix& a, const Matrix& b, double floor = 1e-12) {
    double diff = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.values()[i] - b.values()[i];
        diff += d * d;
        na += a.values()[i] * a.values()[i];
        nb += b.values()[i] * b.values()[i];
    }
    return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), floor});
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    double best = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) best = std::max(best, std::abs(a.values()[i] - b.values()[i]));
    return best;
}

}  // namespace janus::oracle

#pragma once

// Dense row-major real matrices and the handful of kernels the rest of the
// library is built on: products, norms, thin Householder QR and Cholesky
// solves. Every exported operation returns finite values or throws.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "janus/errors.hpp"

namespace janus {

class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) {
            throw ShapeError("Matrix: data length " + std::to_string(data_.size()) + " != " +
                             std::to_string(rows_) + "x" + std::to_string(cols_));
        }
        check_finite("Matrix");
    }

    Matrix(std::initializer_list<std::initializer_list<double>> init) {
        rows_ = init.size();
        cols_ = rows_ == 0 ? 0 : init.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& r : init) {
            if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
        check_finite("Matrix");
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

    Matrix& operator+=(const Matrix& other) {
        require_same_shape(other, "operator+=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
        return check_finite("operator+=");
    }

    Matrix& operator-=(const Matrix& other) {
        require_same_shape(other, "operator-=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
        return check_finite("operator-=");
    }

    Matrix& operator*=(double factor) {
        for (double& v : data_) v *= factor;
        return check_finite("operator*=");
    }

    Matrix& check_finite(const char* where) {
        for (double v : data_) {
            if (!std::isfinite(v)) throw NumericalError(std::string(where) + ": non-finite entry");
        }
        return *this;
    }

    void require_same_shape(const Matrix& other, const char* where) const {
        if (rows_ != other.rows_ || cols_ != other.cols_) {
            throw ShapeError(std::string(where) + ": " + shape_string() + " vs " + other.shape_string());
        }
    }

    std::string shape_string() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Matrix operator+(Matrix lhs, const Matrix& rhs) { return lhs += rhs; }
inline Matrix operator-(Matrix lhs, const Matrix& rhs) { return lhs -= rhs; }
inline Matrix operator*(Matrix m, double factor) { return m *= factor; }
inline Matrix operator*(double factor, Matrix m) { return m *= factor; }
inline Matrix operator-(Matrix m) { return m *= -1.0; }

inline Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

/// lhs · rhs, accumulated in i-k-j order.
inline Matrix matmul(const Matrix& lhs, const Matrix& rhs) {
    if (lhs.cols() != rhs.rows()) {
        throw ShapeError("matmul: " + lhs.shape_string() + " * " + rhs.shape_string());
    }
    Matrix out(lhs.rows(), rhs.cols());
    const std::size_t inner = lhs.cols();
    const std::size_t n = rhs.cols();
    for (std::size_t i = 0; i < lhs.rows(); ++i) {
        auto orow = out.row(i);
        for (std::size_t k = 0; k < inner; ++k) {
            const double a = lhs(i, k);
            if (a == 0.0) continue;
            auto rrow = rhs.row(k);
            for (std::size_t j = 0; j < n; ++j) orow[j] += a * rrow[j];
        }
    }
    return out.check_finite("matmul");
}

/// lhsᵀ · rhs without materializing the transpose.
inline Matrix matmul_tn(const Matrix& lhs, const Matrix& rhs) {
    if (lhs.rows() != rhs.rows()) {
        throw ShapeError("matmul_tn: " + lhs.shape_string() + "^T * " + rhs.shape_string());
    }
    Matrix out(lhs.cols(), rhs.cols());
    for (std::size_t k = 0; k < lhs.rows(); ++k) {
        auto lrow = lhs.row(k);
        auto rrow = rhs.row(k);
        for (std::size_t i = 0; i < lhs.cols(); ++i) {
            const double a = lrow[i];
            if (a == 0.0) continue;
            auto orow = out.row(i);
            for (std::size_t j = 0; j < rhs.cols(); ++j) orow[j] += a * rrow[j];
        }
    }
    return out.check_finite("matmul_tn");
}

/// lhs · rhsᵀ without materializing the transpose.
inline Matrix matmul_nt(const Matrix& lhs, const Matrix& rhs) {
    if (lhs.cols() != rhs.cols()) {
        throw ShapeError("matmul_nt: " + lhs.shape_string() + " * " + rhs.shape_string() + "^T");
    }
    Matrix out(lhs.rows(), rhs.rows());
    for (std::size_t i = 0; i < lhs.rows(); ++i) {
        auto lrow = lhs.row(i);
        for (std::size_t j = 0; j < rhs.rows(); ++j) {
            auto rrow = rhs.row(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < lhs.cols(); ++k) acc += lrow[k] * rrow[k];
            out(i, j) = acc;
        }
    }
    return out.check_finite("matmul_nt");
}

inline double frobenius_norm(const Matrix& m) {
    double acc = 0.0;
    for (double v : m.values()) acc += v * v;
    return std::sqrt(acc);
}

inline double max_abs(const Matrix& m) {
    double best = 0.0;
    for (double v : m.values()) best = std::max(best, std::abs(v));
    return best;
}

/// Copy of columns [first, first + count).
inline Matrix columns(const Matrix& m, std::size_t first, std::size_t count) {
    if (first + count > m.cols()) throw ShapeError("columns: range exceeds " + m.shape_string());
    Matrix out(m.rows(), count);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < count; ++j) out(i, j) = m(i, first + j);
    return out;
}

/// Copy of the listed rows, in order.
inline Matrix gather_rows(const Matrix& m, std::span<const std::size_t> indices) {
    Matrix out(indices.size(), m.cols());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        if (indices[r] >= m.rows()) throw ShapeError("gather_rows: index out of range");
        std::copy_n(m.row(indices[r]).begin(), m.cols(), out.row(r).begin());
    }
    return out;
}

/// Stack a below b.
inline Matrix vstack(const Matrix& a, const Matrix& b) {
    if (a.empty() && a.cols() == 0) return b;
    if (a.cols() != b.cols()) throw ShapeError("vstack: " + a.shape_string() + " over " + b.shape_string());
    Matrix out(a.rows() + b.rows(), a.cols());
    std::copy(a.values().begin(), a.values().end(), out.values().begin());
    std::copy(b.values().begin(), b.values().end(), out.values().begin() + static_cast<std::ptrdiff_t>(a.size()));
    return out;
}

struct QrResult {
    Matrix q;  // d x k, orthonormal columns
    Matrix r;  // k x k, upper triangular, nonnegative diagonal
};

/// Thin Householder QR of a d x k matrix (d >= k). The sign of each
/// reflector is fixed so that diag(R) >= 0, which makes the factorization
/// unique for full-rank input.
inline QrResult qr_thin(const Matrix& m, double rank_tol = 1e-12) {
    const std::size_t d = m.rows();
    const std::size_t k = m.cols();
    if (d < k) throw ShapeError("qr_thin: need rows >= cols, got " + m.shape_string());

    Matrix work = m;
    std::vector<std::vector<double>> reflectors(k);
    std::vector<double> v;

    for (std::size_t j = 0; j < k; ++j) {
        double norm_sq = 0.0;
        for (std::size_t i = j; i < d; ++i) norm_sq += work(i, j) * work(i, j);
        const double norm = std::sqrt(norm_sq);
        v.assign(d - j, 0.0);
        if (norm == 0.0) {
            reflectors[j] = v;
            continue;
        }
        const double x0 = work(j, j);
        const double alpha = x0 >= 0.0 ? -norm : norm;
        for (std::size_t i = j; i < d; ++i) v[i - j] = work(i, j);
        v[0] -= alpha;
        double v_sq = 0.0;
        for (double x : v) v_sq += x * x;
        if (v_sq == 0.0) {
            reflectors[j] = v;
            continue;
        }
        // work[j:, j:] -= 2 v (vᵀ work[j:, j:]) / vᵀv
        for (std::size_t c = j; c < k; ++c) {
            double dot = 0.0;
            for (std::size_t i = j; i < d; ++i) dot += v[i - j] * work(i, c);
            const double f = 2.0 * dot / v_sq;
            for (std::size_t i = j; i < d; ++i) work(i, c) -= f * v[i - j];
        }
        reflectors[j] = v;
    }

    Matrix r(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j) r(i, j) = work(i, j);

    // Q = H_0 H_1 ... H_{k-1} applied to the first k columns of I.
    Matrix q(d, k);
    for (std::size_t j = 0; j < k; ++j) q(j, j) = 1.0;
    for (std::size_t jj = k; jj-- > 0;) {
        const auto& h = reflectors[jj];
        double v_sq = 0.0;
        for (double x : h) v_sq += x * x;
        if (v_sq == 0.0) continue;
        for (std::size_t c = 0; c < k; ++c) {
            double dot = 0.0;
            for (std::size_t i = jj; i < d; ++i) dot += h[i - jj] * q(i, c);
            const double f = 2.0 * dot / v_sq;
            for (std::size_t i = jj; i < d; ++i) q(i, c) -= f * h[i - jj];
        }
    }

    for (std::size_t j = 0; j < k; ++j) {
        if (std::abs(r(j, j)) < rank_tol) {
            throw DegeneracyError("qr_thin: column " + std::to_string(j) + " is linearly dependent (|R_jj| = " +
                                  std::to_string(std::abs(r(j, j))) + ")",
                                  j);
        }
        if (r(j, j) < 0.0) {
            for (std::size_t c = j; c < k; ++c) r(j, c) = -r(j, c);
            for (std::size_t i = 0; i < d; ++i) q(i, j) = -q(i, j);
        }
    }
    q.check_finite("qr_thin");
    r.check_finite("qr_thin");
    return {std::move(q), std::move(r)};
}

/// Solve G·X = H for symmetric positive-definite G via Cholesky.
inline Matrix solve_spd(const Matrix& g, const Matrix& h) {
    const std::size_t n = g.rows();
    if (g.cols() != n) throw ShapeError("solve_spd: G must be square, got " + g.shape_string());
    if (h.rows() != n) throw ShapeError("solve_spd: G " + g.shape_string() + " vs H " + h.shape_string());

    const double sym_tol = 1e-10 * std::max(1.0, max_abs(g));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(g(i, j) - g(j, i)) > sym_tol) {
                throw NumericalError("solve_spd: G is not symmetric at (" + std::to_string(i) + "," +
                                     std::to_string(j) + ")");
            }

    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = g(j, j);
        for (std::size_t p = 0; p < j; ++p) diag -= l(j, p) * l(j, p);
        if (!(diag > 0.0) || !std::isfinite(diag)) {
            throw NumericalError("solve_spd: G is not positive-definite (pivot " + std::to_string(j) +
                                 " = " + std::to_string(diag) + ")");
        }
        const double ljj = std::sqrt(diag);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double acc = g(i, j);
            for (std::size_t p = 0; p < j; ++p) acc -= l(i, p) * l(j, p);
            l(i, j) = acc / ljj;
        }
    }

    Matrix x = h;
    const std::size_t m = h.cols();
    for (std::size_t c = 0; c < m; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = x(i, c);
            for (std::size_t p = 0; p < i; ++p) acc -= l(i, p) * x(p, c);
            x(i, c) = acc / l(i, i);
        }
        for (std::size_t i = n; i-- > 0;) {
            double acc = x(i, c);
            for (std::size_t p = i + 1; p < n; ++p) acc -= l(p, i) * x(p, c);
            x(i, c) = acc / l(i, i);
        }
    }
    return x.check_finite("solve_spd");
}

}  // namespace janus

#pragma once

// Activation-subspace tracking on the Stiefel manifold.
//
// The online estimator takes a Euclidean gradient step on the reconstruction
// loss 1/2 ||X - X V Vᵀ||² and retracts with the Q factor of a thin QR.
// offline_svd_basis is the store-everything baseline used for comparison.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "janus/matrix.hpp"
#include "janus/random.hpp"

namespace janus {

namespace detail {

inline void require_basis_input(const Matrix& v, const Matrix& x, const char* where) {
    if (x.cols() != v.rows()) {
        throw ShapeError(std::string(where) + ": X " + x.shape_string() + " vs V " + v.shape_string());
    }
}

struct SymmetricEigen {
    std::vector<double> values;  // descending
    Matrix vectors;              // columns
};

/// Cyclic Jacobi on a small symmetric matrix.
inline SymmetricEigen symmetric_eigen(Matrix a, int max_sweeps = 100) {
    const std::size_t n = a.rows();
    Matrix v = Matrix::identity(n);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off <= 1e-30 * std::max(1.0, max_abs(a) * max_abs(a))) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
    SymmetricEigen out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t c = 0; c < n; ++c) {
        out.values[c] = a(order[c], order[c]);
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
    }
    return out;
}

/// Flip each column so its largest-magnitude entry is positive.
inline void canonical_signs(Matrix& v) {
    for (std::size_t c = 0; c < v.cols(); ++c) {
        std::size_t arg = 0;
        for (std::size_t r = 1; r < v.rows(); ++r)
            if (std::abs(v(r, c)) > std::abs(v(arg, c))) arg = r;
        if (v.rows() > 0 && v(arg, c) < 0.0)
            for (std::size_t r = 0; r < v.rows(); ++r) v(r, c) = -v(r, c);
    }
}

}  // namespace detail

/// 1/2 ||X - X V Vᵀ||_F² for row-sample X (N x D) and basis V (D x k).
inline double recon_loss(const Matrix& v, const Matrix& x) {
    detail::require_basis_input(v, x, "recon_loss");
    const Matrix residual = x - matmul_nt(matmul(x, v), v);
    const double norm = frobenius_norm(residual);
    return 0.5 * norm * norm;
}

/// Euclidean gradient of recon_loss with respect to V:
/// -[(I - VVᵀ) S + S (I - VVᵀ)] V, S = XᵀX. Valid for any V, not only
/// orthonormal ones.
inline Matrix recon_grad(const Matrix& v, const Matrix& x) {
    detail::require_basis_input(v, x, "recon_grad");
    const Matrix xv = matmul(x, v);
    const Matrix sv = matmul_tn(x, xv);
    Matrix left = sv - matmul(v, matmul_tn(v, sv));
    const Matrix v_perp = v - matmul(v, matmul_tn(v, v));
    const Matrix right = matmul_tn(x, matmul(x, v_perp));
    left += right;
    return -left;
}

/// One projected-gradient step: V - eta ∇L, then V <- Q of the thin QR.
/// Throws DegeneracyError (with the column index) if the step collapses rank.
inline Matrix oe_step(const Matrix& v, const Matrix& x, double eta) {
    const Matrix stepped = v - eta * recon_grad(v, x);
    return qr_thin(stepped).q;
}

/// Frozen copy of an estimator's basis taken at a task boundary.
class ProtectionBasis {
public:
    ProtectionBasis(Matrix v, std::size_t source_task, std::size_t layer_id)
        : v_(std::move(v)), source_task_(source_task), layer_id_(layer_id) {}

    const Matrix& v() const noexcept { return v_; }
    std::size_t source_task() const noexcept { return source_task_; }
    std::size_t layer_id() const noexcept { return layer_id_; }
    std::size_t dim() const noexcept { return v_.rows(); }
    std::size_t rank() const noexcept { return v_.cols(); }

private:
    Matrix v_;
    std::size_t source_task_;
    std::size_t layer_id_;
};

class OnlineEstimator {
public:
    /// Starts from the first k columns of I_D.
    OnlineEstimator(std::size_t dim, std::size_t rank, double eta, std::size_t layer_id, std::uint64_t seed = 0)
        : OnlineEstimator(identity_columns(dim, rank), eta, layer_id, seed) {}

    /// Starts from span(initial); dependent columns are re-drawn.
    OnlineEstimator(const Matrix& initial, double eta, std::size_t layer_id, std::uint64_t seed = 0)
        : eta_(eta), layer_id_(layer_id), rng_(seed) {
        if (!(eta > 0.0)) throw ConfigError("OnlineEstimator: eta_v must be > 0");
        if (initial.cols() > initial.rows()) {
            throw ShapeError("OnlineEstimator: rank " + std::to_string(initial.cols()) + " > dim " +
                             std::to_string(initial.rows()));
        }
        retract(initial);
    }

    const Matrix& v() const noexcept { return v_; }
    std::size_t rank() const noexcept { return v_.cols(); }
    std::size_t dim() const noexcept { return v_.rows(); }
    double eta() const noexcept { return eta_; }
    std::size_t layer_id() const noexcept { return layer_id_; }
    std::size_t reseeds() const noexcept { return reseeds_; }

    /// One oe_step on a batch of row-sample activations.
    void step(const Matrix& x) { retract(v_ - eta_ * recon_grad(v_, x)); }

    ProtectionBasis snapshot(std::size_t task) const { return ProtectionBasis(v_, task, layer_id_); }

private:
    static Matrix identity_columns(std::size_t dim, std::size_t rank) {
        if (rank > dim) throw ShapeError("OnlineEstimator: rank " + std::to_string(rank) + " > dim " + std::to_string(dim));
        Matrix v(dim, rank);
        for (std::size_t j = 0; j < rank; ++j) v(j, j) = 1.0;
        return v;
    }

    /// V <- Q(stepped). A collapsed column is replaced by a seeded Gaussian
    /// column and the factorization retried.
    void retract(Matrix stepped) {
        for (std::size_t attempt = 0; attempt <= stepped.cols(); ++attempt) {
            try {
                v_ = qr_thin(stepped).q;
                return;
            } catch (const DegeneracyError& e) {
                if (e.column == DegeneracyError::npos) throw;
                std::normal_distribution<double> dist(0.0, 1.0);
                for (std::size_t r = 0; r < stepped.rows(); ++r) stepped(r, e.column) = dist(rng_);
                ++reseeds_;
            }
        }
        throw DegeneracyError("OnlineEstimator: could not restore full rank");
    }

    Matrix v_;
    double eta_;
    std::size_t layer_id_;
    Rng rng_;
    std::size_t reseeds_ = 0;
};

inline OnlineEstimator oe_step(OnlineEstimator est, const Matrix& x) {
    est.step(x);
    return est;
}

inline ProtectionBasis snapshot(const OnlineEstimator& est, std::size_t task) { return est.snapshot(task); }

/// ||V1 V1ᵀ - V2 V2ᵀ||_F.
inline double subspace_distance(const Matrix& v1, const Matrix& v2) {
    if (v1.rows() != v2.rows()) throw ShapeError("subspace_distance: " + v1.shape_string() + " vs " + v2.shape_string());
    return frobenius_norm(matmul_nt(v1, v1) - matmul_nt(v2, v2));
}

/// Top-k right singular vectors of X_all (M x D), as columns of a D x k
/// matrix ordered by decreasing singular value. Block power iteration on
/// XᵀX with QR re-orthonormalization, finished by a Rayleigh-Ritz rotation.
inline Matrix offline_svd_basis(const Matrix& x_all, std::size_t k, int max_iters = 5000, double tol = 1e-14) {
    const std::size_t d = x_all.cols();
    if (k > d) throw ShapeError("offline_svd_basis: k " + std::to_string(k) + " > D " + std::to_string(d));
    if (x_all.rows() < k) throw ShapeError("offline_svd_basis: fewer samples than k");
    if (k == 0) return Matrix(d, 0);

    Matrix s = matmul_tn(x_all, x_all);
    const double scale = max_abs(s);
    if (scale == 0.0) throw DegeneracyError("offline_svd_basis: k exceeds rank of X_all (rank 0)");
    s *= 1.0 / scale;

    Rng rng(0x5eed5eedULL);
    Matrix v = random_orthonormal(d, k, rng);
    auto rank_error = [&](std::size_t col) {
        return DegeneracyError("offline_svd_basis: k = " + std::to_string(k) + " exceeds rank of X_all (direction " +
                                   std::to_string(col) + " has no energy)",
                               col);
    };
    for (int it = 0; it < max_iters; ++it) {
        Matrix q;
        try {
            q = qr_thin(matmul(s, v)).q;
        } catch (const DegeneracyError& e) {
            throw rank_error(e.column);
        }
        const Matrix change = q - matmul(v, matmul_tn(v, q));
        v = std::move(q);
        if (frobenius_norm(change) <= tol) break;
    }

    const auto ritz = detail::symmetric_eigen(matmul_tn(v, matmul(s, v)));
    if (ritz.values.back() <= 1e-12 * std::max(ritz.values.front(), 0.0)) throw rank_error(k - 1);
    v = matmul(v, ritz.vectors);
    detail::canonical_signs(v);
    return v;
}

}  // namespace janus

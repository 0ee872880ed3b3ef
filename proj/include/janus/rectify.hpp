#pragma once

// Safe gradient projection and gradient rectification.
//
// safe_project removes the protected input directions from a full-matrix
// gradient. rectify turns that full-matrix target into factor increments
// whose composite s(B·dA + dB·A) best approximates it, solving first for dA
// with B fixed and then for dB against the leftover residual.

#include <string>

#include "janus/lora.hpp"
#include "janus/matrix.hpp"
#include "janus/subspace.hpp"

namespace janus {

struct RectifyConfig {
    double delta = 1e-6;  // ridge term on both stages

    void validate() const {
        if (!(delta > 0.0)) throw ConfigError("rectify.delta must be > 0");
    }
};

/// G_W · (I - V Vᵀ): the Frobenius-nearest matrix to G_W with (result)·V = 0.
inline Matrix safe_project(const Matrix& grad_w, const Matrix& v) {
    if (v.rows() != grad_w.cols()) {
        throw ShapeError("safe_project: G_W " + grad_w.shape_string() + " vs basis " + v.shape_string());
    }
    if (v.cols() == 0) return grad_w;
    return grad_w - matmul_nt(matmul(grad_w, v), v);
}

inline Matrix safe_project(const Matrix& grad_w, const ProtectionBasis& basis) { return safe_project(grad_w, basis.v()); }

namespace detail {

inline Matrix gram_plus_ridge(const Matrix& gram, double delta) {
    Matrix g = gram;
    for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) += delta;
    return g;
}

}  // namespace detail

/// Two-stage ridge decomposition of a full-matrix target into (dA, dB):
///   dA = (1/s) (BᵀB + δI)⁻¹ Bᵀ G
///   R  = G - s B dA
///   dB = (1/s) R Aᵀ (AAᵀ + δI)⁻¹
inline FactorPair rectify(const LoraAdapter& adapter, const Matrix& target, const RectifyConfig& cfg) {
    cfg.validate();
    adapter.base().require_same_shape(target, "rectify");
    const double s = adapter.scale();
    if (s == 0.0) throw NumericalError("rectify: adapter scale is zero");
    const Matrix& a = adapter.a();
    const Matrix& b = adapter.b();

    Matrix da = solve_spd(detail::gram_plus_ridge(matmul_tn(b, b), cfg.delta), matmul_tn(b, target));
    da *= 1.0 / s;

    const Matrix residual = target - s * matmul(b, da);

    // (AAᵀ + δI) dBᵀ = A Rᵀ
    Matrix db = transpose(solve_spd(detail::gram_plus_ridge(matmul_nt(a, a), cfg.delta), matmul_nt(a, residual)));
    db *= 1.0 / s;
    return {std::move(da), std::move(db)};
}

/// Null-space violation ||dW · X_refᵀ||_F for row-sample reference activations.
inline double violation(const Matrix& dw, const Matrix& x_ref) {
    if (dw.cols() != x_ref.cols()) throw ShapeError("violation: dW " + dw.shape_string() + " vs X " + x_ref.shape_string());
    return frobenius_norm(matmul_nt(dw, x_ref));
}

}  // namespace janus

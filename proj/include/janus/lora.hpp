#pragma once

// Low-rank adapted linear layer: W = W0 + s·B·A with W0 frozen.

#include <cmath>
#include <utility>

#include "janus/matrix.hpp"
#include "janus/random.hpp"

namespace janus {

/// Factor-space pair (gradients or increments) for one adapter.
struct FactorPair {
    Matrix a;  // r x d_in
    Matrix b;  // d_out x r
};

class LoraAdapter {
public:
    LoraAdapter(Matrix base, Matrix a, Matrix b, double scale)
        : base_(std::move(base)), a_(std::move(a)), b_(std::move(b)), scale_(scale) {
        if (a_.cols() != base_.cols() || b_.rows() != base_.rows() || a_.rows() != b_.cols()) {
            throw ShapeError("LoraAdapter: W0 " + base_.shape_string() + ", A " + a_.shape_string() + ", B " +
                             b_.shape_string());
        }
        if (rank() > std::min(d_in(), d_out())) throw ShapeError("LoraAdapter: rank exceeds min(d_in, d_out)");
        if (!std::isfinite(scale_)) throw NumericalError("LoraAdapter: non-finite scale");
    }

    /// A ~ N(0, 1/d_in), B = 0, so the adapted layer starts as W0 exactly.
    static LoraAdapter standard_init(Matrix base, std::size_t rank, double scale, Rng& rng) {
        const std::size_t d_in = base.cols();
        const std::size_t d_out = base.rows();
        Matrix a = gaussian_matrix(rank, d_in, 1.0 / std::sqrt(static_cast<double>(d_in)), rng);
        return LoraAdapter(std::move(base), std::move(a), Matrix(d_out, rank), scale);
    }

    const Matrix& base() const noexcept { return base_; }
    const Matrix& a() const noexcept { return a_; }
    const Matrix& b() const noexcept { return b_; }
    double scale() const noexcept { return scale_; }
    std::size_t rank() const noexcept { return a_.rows(); }
    std::size_t d_in() const noexcept { return base_.cols(); }
    std::size_t d_out() const noexcept { return base_.rows(); }

    /// A += dA, B += dB. W0 is untouched.
    void apply(const Matrix& da, const Matrix& db) {
        a_.require_same_shape(da, "LoraAdapter::apply(dA)");
        b_.require_same_shape(db, "LoraAdapter::apply(dB)");
        a_ += da;
        b_ += db;
    }

    bool operator==(const LoraAdapter&) const = default;

private:
    Matrix base_;
    Matrix a_;
    Matrix b_;
    double scale_;
};

inline Matrix effective_weight(const LoraAdapter& adapter) {
    return adapter.base() + adapter.scale() * matmul(adapter.b(), adapter.a());
}

/// Y = X·Wᵀ for row-sample input X (N x d_in).
inline Matrix forward(const LoraAdapter& adapter, const Matrix& x) {
    if (x.cols() != adapter.d_in()) {
        throw ShapeError("lora forward: input " + x.shape_string() + " for d_in " + std::to_string(adapter.d_in()));
    }
    return matmul_nt(x, effective_weight(adapter));
}

/// Chain rule through W = W0 + sBA: G_A = s·Bᵀ·G_W, G_B = s·G_W·Aᵀ.
inline FactorPair factor_grads(const LoraAdapter& adapter, const Matrix& grad_w) {
    adapter.base().require_same_shape(grad_w, "factor_grads");
    const double s = adapter.scale();
    return {s * matmul_tn(adapter.b(), grad_w), s * matmul_nt(grad_w, adapter.a())};
}

/// First-order change of W under (dA, dB): s·(B·dA + dB·A).
inline Matrix composite_update(const LoraAdapter& adapter, const Matrix& da, const Matrix& db) {
    adapter.a().require_same_shape(da, "composite_update(dA)");
    adapter.b().require_same_shape(db, "composite_update(dB)");
    return adapter.scale() * (matmul(adapter.b(), da) + matmul(db, adapter.a()));
}

inline LoraAdapter apply_factors(LoraAdapter adapter, const Matrix& da, const Matrix& db) {
    adapter.apply(da, db);
    return adapter;
}

}  // namespace janus

#pragma once

// Frozen random backbone with a LoRA adapter on every hidden linear layer,
// feature normalization at the penultimate layer and a growable linear head
// over the normalized features. Backward returns gradients with respect to
// each layer's effective weight; the factor-space step is decided elsewhere.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "janus/dml.hpp"
#include "janus/lora.hpp"
#include "janus/matrix.hpp"
#include "janus/random.hpp"

namespace janus {

enum class Activation { identity, tanh };

inline const char* activation_name(Activation act) { return act == Activation::tanh ? "tanh" : "identity"; }

struct AdaptedLayer {
    LoraAdapter adapter;
    Activation act = Activation::tanh;
};

/// Everything backward needs from a forward pass.
struct ForwardCache {
    std::uint64_t version = 0;
    std::vector<Matrix> inputs;   // X_l fed to layer l
    std::vector<Matrix> outputs;  // post-activation H_l
    Matrix hidden;                // last hidden output before normalization
    Matrix features;              // normalized rows
};

struct ForwardResult {
    Matrix logits;
    Matrix features;
    ForwardCache cache;
};

struct Gradients {
    std::vector<Matrix> weight;  // dL/dW_l per adapted layer
    Matrix head;
};

class ToyNet {
public:
    ToyNet(std::vector<AdaptedLayer> layers, Matrix head) : layers_(std::move(layers)), head_(std::move(head)) {
        for (std::size_t l = 1; l < layers_.size(); ++l) {
            if (layers_[l].adapter.d_in() != layers_[l - 1].adapter.d_out())
                throw ShapeError("ToyNet: layer " + std::to_string(l) + " input width mismatch");
        }
    }

    /// Input width, then one entry per hidden layer. Backbone weights are
    /// N(0, 1/fan_in) and never change afterwards.
    static ToyNet make(std::size_t input_dim, const std::vector<std::size_t>& widths, std::size_t rank, double scale,
                       Rng& rng, Activation act = Activation::tanh) {
        std::vector<AdaptedLayer> layers;
        std::size_t fan_in = input_dim;
        for (std::size_t w : widths) {
            Matrix w0 = gaussian_matrix(w, fan_in, 1.0 / std::sqrt(static_cast<double>(fan_in)), rng);
            layers.push_back({LoraAdapter::standard_init(std::move(w0), rank, scale, rng), act});
            fan_in = w;
        }
        return ToyNet(std::move(layers), Matrix(0, fan_in));
    }

    const std::vector<AdaptedLayer>& layers() const noexcept { return layers_; }
    const Matrix& head() const noexcept { return head_; }
    std::size_t depth() const noexcept { return layers_.size(); }
    std::size_t n_classes() const noexcept { return head_.rows(); }
    std::size_t feature_dim() const noexcept { return head_.cols(); }
    std::size_t input_dim() const noexcept { return layers_.empty() ? head_.cols() : layers_.front().adapter.d_in(); }
    std::uint64_t version() const noexcept { return version_; }

    void apply_layer_update(std::size_t l, const Matrix& da, const Matrix& db) {
        layers_.at(l).adapter.apply(da, db);
        ++version_;
    }

    void apply_head_update(const Matrix& dh) {
        head_ += dh;
        ++version_;
    }

    /// Appends n_new zero rows to the head.
    void expand_head(std::size_t n_new) {
        if (n_new == 0) throw ProtocolError("expand_head: n_new must be >= 1");
        head_ = vstack(head_, Matrix(n_new, head_.cols()));
        ++version_;
    }

private:
    std::vector<AdaptedLayer> layers_;
    Matrix head_;
    std::uint64_t version_ = 0;
};

inline ToyNet expand_head(ToyNet net, std::size_t n_new) {
    net.expand_head(n_new);
    return net;
}

inline ForwardResult forward(const ToyNet& net, const Matrix& x) {
    if (x.cols() != net.input_dim()) {
        throw ShapeError("ToyNet forward: input " + x.shape_string() + " for width " + std::to_string(net.input_dim()));
    }
    ForwardCache cache;
    cache.version = net.version();
    Matrix h = x;
    for (const auto& layer : net.layers()) {
        cache.inputs.push_back(h);
        Matrix pre = forward(layer.adapter, h);
        if (layer.act == Activation::tanh)
            for (double& v : pre.values()) v = std::tanh(v);
        cache.outputs.push_back(pre);
        h = std::move(pre);
    }
    cache.hidden = h;
    cache.features = normalize_features(h);
    ForwardResult out;
    out.logits = matmul_nt(cache.features, net.head());
    out.features = cache.features;
    out.cache = std::move(cache);
    return out;
}

struct CrossEntropy {
    double loss = 0.0;
    Matrix dlogits;
};

/// Mean softmax cross-entropy; dlogits = (softmax - onehot) / N.
inline CrossEntropy cross_entropy(const Matrix& logits, std::span<const ClassId> labels) {
    const std::size_t n = logits.rows();
    const std::size_t c = logits.cols();
    if (labels.size() != n) throw ShapeError("cross_entropy: label count != rows");
    CrossEntropy out{0.0, Matrix(n, c)};
    if (n == 0) return out;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= c) {
            throw ProtocolError("cross_entropy: label " + std::to_string(labels[i]) + " outside [0, " +
                                std::to_string(c) + ")");
        }
        const auto row = logits.row(i);
        double peak = row[0];
        for (double v : row) peak = std::max(peak, v);
        double denom = 0.0;
        for (double v : row) denom += std::exp(v - peak);
        const auto y = static_cast<std::size_t>(labels[i]);
        out.loss += (std::log(denom) + peak - row[y]) * inv_n;
        auto grad = out.dlogits.row(i);
        for (std::size_t j = 0; j < c; ++j) grad[j] = std::exp(row[j] - peak) / denom * inv_n;
        grad[y] -= inv_n;
    }
    return out;
}

/// Reverse pass. dz_extra (N x d_f, or empty) is added to the gradient at the
/// normalized-feature tap.
inline Gradients backward(const ToyNet& net, const ForwardCache& cache, const Matrix& dlogits, const Matrix& dz_extra) {
    if (cache.version != net.version() || cache.inputs.size() != net.depth()) {
        throw ProtocolError("backward: cache is stale (parameters changed since the forward pass)");
    }
    const Matrix& z = cache.features;
    if (dlogits.rows() != z.rows() || dlogits.cols() != net.n_classes()) {
        throw ShapeError("backward: dlogits " + dlogits.shape_string());
    }
    Gradients grads;
    grads.head = matmul_tn(dlogits, z);

    Matrix dz = matmul(dlogits, net.head());
    if (!dz_extra.empty()) dz += dz_extra;

    // z = h / max(||h||, eps)
    Matrix dh(z.rows(), z.cols());
    for (std::size_t i = 0; i < z.rows(); ++i) {
        const auto hrow = cache.hidden.row(i);
        double sq = 0.0;
        for (double v : hrow) sq += v * v;
        const double norm = std::sqrt(sq);
        const auto zrow = z.row(i);
        const auto grow = dz.row(i);
        auto out = dh.row(i);
        if (norm <= 1e-12) {
            for (std::size_t j = 0; j < out.size(); ++j) out[j] = grow[j] / 1e-12;
            continue;
        }
        double proj = 0.0;
        for (std::size_t j = 0; j < zrow.size(); ++j) proj += zrow[j] * grow[j];
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = (grow[j] - zrow[j] * proj) / norm;
    }

    grads.weight.resize(net.depth());
    Matrix upstream = std::move(dh);
    for (std::size_t l = net.depth(); l-- > 0;) {
        const auto& layer = net.layers()[l];
        if (layer.act == Activation::tanh) {
            const Matrix& h = cache.outputs[l];
            for (std::size_t i = 0; i < upstream.size(); ++i) upstream.values()[i] *= 1.0 - h.values()[i] * h.values()[i];
        }
        grads.weight[l] = matmul_tn(upstream, cache.inputs[l]);
        if (l > 0) upstream = matmul(upstream, effective_weight(layer.adapter));
    }
    return grads;
}

struct LossBundle {
    double task = 0.0;
    double dml = 0.0;
    double total = 0.0;
    double lambda = 0.0;
};

inline LossBundle total_loss(double task_loss, double dml_loss_value, double lambda) {
    return {task_loss, dml_loss_value, task_loss + lambda * dml_loss_value, lambda};
}

}  // namespace janus

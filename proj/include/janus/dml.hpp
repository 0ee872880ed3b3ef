#pragma once

// Decoupled margin loss over unit-norm features and class prototypes.
//
// Pull: softmax cross-entropy of z_i·p_c / tau over the live (current-task)
// prototypes. Push: hinge max(0, z_i·p_j - m) averaged over every
// (sample, past prototype) pair. Prototypes are constants for the gradient.

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "janus/matrix.hpp"

namespace janus {

using ClassId = int;
using Prototype = std::vector<double>;

struct DmlConfig {
    double margin = 0.3;
    double tau = 0.07;
    double lambda = 1.0;

    void validate() const {
        if (!(tau > 0.0)) throw ConfigError("dml.tau must be > 0");
        if (!(margin >= 0.0 && margin < 1.0)) throw ConfigError("dml.margin must be in [0, 1)");
        if (!(lambda >= 0.0)) throw ConfigError("dml.lambda must be >= 0");
    }
};

/// Each row divided by max(||row||, 1e-12).
inline Matrix normalize_features(const Matrix& h) {
    Matrix z = h;
    for (std::size_t i = 0; i < z.rows(); ++i) {
        auto row = z.row(i);
        double sq = 0.0;
        for (double v : row) sq += v * v;
        const double norm = std::max(std::sqrt(sq), 1e-12);
        for (double& v : row) v /= norm;
    }
    return z;
}

/// Unit-norm features with their class labels.
struct FeatureBatch {
    Matrix z;
    std::vector<ClassId> labels;

    FeatureBatch(Matrix features, std::vector<ClassId> row_labels) : z(std::move(features)), labels(std::move(row_labels)) {
        if (labels.size() != z.rows()) throw ShapeError("FeatureBatch: label count != rows");
        for (std::size_t i = 0; i < z.rows(); ++i) {
            double sq = 0.0;
            for (double v : z.row(i)) sq += v * v;
            if (std::abs(std::sqrt(sq) - 1.0) > 1e-8) {
                throw ProtocolError("FeatureBatch: row " + std::to_string(i) + " is not unit-norm");
            }
        }
    }
};

class PrototypeBank {
public:
    PrototypeBank(std::size_t dim, double momentum = 0.9) : dim_(dim), momentum_(momentum) {
        if (!(momentum >= 0.0 && momentum <= 1.0)) throw ConfigError("dml.momentum must be in [0, 1]");
    }

    std::size_t dim() const noexcept { return dim_; }
    double momentum() const noexcept { return momentum_; }
    const std::map<ClassId, Prototype>& past() const noexcept { return past_; }
    const std::map<ClassId, Prototype>& live() const noexcept { return live_; }

    /// EMA toward the class mean of the given rows, then renormalize. The
    /// first sighting initializes the prototype to the normalized mean.
    void update_live(ClassId cls, const Matrix& z_class) {
        if (past_.contains(cls)) throw ProtocolError("update_live_prototype: class " + std::to_string(cls) + " is frozen");
        if (z_class.cols() != dim_) throw ShapeError("update_live_prototype: feature width mismatch");
        if (z_class.rows() == 0) return;
        Prototype mean(dim_, 0.0);
        for (std::size_t i = 0; i < z_class.rows(); ++i)
            for (std::size_t j = 0; j < dim_; ++j) mean[j] += z_class(i, j);
        for (double& v : mean) v /= static_cast<double>(z_class.rows());

        auto it = live_.find(cls);
        Prototype next(dim_);
        if (it == live_.end()) {
            next = mean;
        } else {
            for (std::size_t j = 0; j < dim_; ++j) next[j] = momentum_ * it->second[j] + (1.0 - momentum_) * mean[j];
        }
        double sq = 0.0;
        for (double v : next) sq += v * v;
        const double norm = std::sqrt(sq);
        if (norm <= 1e-12) {
            if (it == live_.end()) throw NumericalError("update_live_prototype: class mean is zero");
            return;
        }
        for (double& v : next) v /= norm;
        live_[cls] = std::move(next);
    }

    /// Move every live prototype into the frozen set.
    void freeze() {
        for (auto& [cls, p] : live_) past_.emplace(cls, std::move(p));
        live_.clear();
    }

    /// Unchecked insertion used by checkpoint loading and tests.
    void set_past(ClassId cls, Prototype p) { emplace_checked(past_, live_, cls, std::move(p)); }
    void set_live(ClassId cls, Prototype p) { emplace_checked(live_, past_, cls, std::move(p)); }

private:
    void emplace_checked(std::map<ClassId, Prototype>& into, const std::map<ClassId, Prototype>& other, ClassId cls,
                         Prototype p) {
        if (p.size() != dim_) throw ShapeError("PrototypeBank: prototype width mismatch");
        if (other.contains(cls)) throw ProtocolError("PrototypeBank: class " + std::to_string(cls) + " already in the other set");
        into[cls] = std::move(p);
    }

    std::size_t dim_;
    double momentum_;
    std::map<ClassId, Prototype> past_;
    std::map<ClassId, Prototype> live_;
};

inline PrototypeBank update_live_prototype(PrototypeBank bank, ClassId cls, const Matrix& z_class) {
    bank.update_live(cls, z_class);
    return bank;
}

inline PrototypeBank freeze_task_prototypes(PrototypeBank bank) {
    bank.freeze();
    return bank;
}

struct DmlResult {
    double loss = 0.0;
    double contrastive = 0.0;
    double hinge = 0.0;
    Matrix dz;  // d loss / d z, same shape as the features
};

/// Loss and feature gradient for rows z (assumed unit-norm) with labels.
inline DmlResult dml_loss(const Matrix& z, std::span<const ClassId> labels, const PrototypeBank& bank,
                          const DmlConfig& cfg) {
    cfg.validate();
    const std::size_t n = z.rows();
    if (labels.size() != n) throw ShapeError("dml_loss: label count != rows");
    if (z.cols() != bank.dim()) throw ShapeError("dml_loss: feature width != prototype width");

    DmlResult out;
    out.dz = Matrix(n, z.cols());
    if (n == 0) return out;

    const auto& live = bank.live();
    std::vector<const Prototype*> live_protos;
    std::vector<ClassId> live_ids;
    for (const auto& [cls, p] : live) {
        live_ids.push_back(cls);
        live_protos.push_back(&p);
    }
    const auto dot = [&](std::size_t i, const Prototype& p) {
        double acc = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) acc += z(i, j) * p[j];
        return acc;
    };

    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> logits(live_protos.size());
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t target = live_protos.size();
        for (std::size_t c = 0; c < live_ids.size(); ++c)
            if (live_ids[c] == labels[i]) target = c;
        if (target == live_protos.size()) {
            throw ProtocolError("dml_loss: label " + std::to_string(labels[i]) + " has no live prototype");
        }
        double peak = -HUGE_VAL;
        for (std::size_t c = 0; c < live_protos.size(); ++c) {
            logits[c] = dot(i, *live_protos[c]) / cfg.tau;
            peak = std::max(peak, logits[c]);
        }
        double denom = 0.0;
        for (double l : logits) denom += std::exp(l - peak);
        out.contrastive += (std::log(denom) + peak - logits[target]) * inv_n;

        auto grad = out.dz.row(i);
        for (std::size_t c = 0; c < live_protos.size(); ++c) {
            const double w = (std::exp(logits[c] - peak) / denom - (c == target ? 1.0 : 0.0)) * inv_n / cfg.tau;
            for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += w * (*live_protos[c])[j];
        }
    }

    const auto& past = bank.past();
    if (!past.empty()) {
        const double inv_pairs = inv_n / static_cast<double>(past.size());
        for (std::size_t i = 0; i < n; ++i) {
            auto grad = out.dz.row(i);
            for (const auto& [cls, p] : past) {
                const double excess = dot(i, p) - cfg.margin;
                if (excess <= 0.0) continue;
                out.hinge += excess * inv_pairs;
                for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += inv_pairs * p[j];
            }
        }
    }
    out.loss = out.contrastive + out.hinge;
    out.dz.check_finite("dml_loss");
    return out;
}

inline DmlResult dml_loss(const FeatureBatch& batch, const PrototypeBank& bank, const DmlConfig& cfg) {
    return dml_loss(batch.z, batch.labels, bank, cfg);
}

}  // namespace janus

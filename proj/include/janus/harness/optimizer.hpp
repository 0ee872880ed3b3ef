#pragma once

// Plain descent and Adam over named parameter slots. Each call turns a
// gradient surrogate into the increment to add to the parameter.

#include <cmath>
#include <map>
#include <string>

#include "janus/harness/config.hpp"
#include "janus/matrix.hpp"

namespace janus::harness {

class Optimizer {
public:
    explicit Optimizer(const ExperimentConfig& cfg)
        : kind_(cfg.optimizer), eta_(cfg.resolved_eta()), beta1_(cfg.beta1), beta2_(cfg.beta2), eps_(cfg.adam_eps) {}

    OptimizerKind kind() const noexcept { return kind_; }

    /// Drops all moment estimates.
    void reset() { slots_.clear(); }

    Matrix increment(const std::string& slot, const Matrix& grad) {
        if (kind_ == OptimizerKind::sgd) return (-eta_) * grad;

        Moments& m = slots_[slot];
        if (m.steps == 0) {
            m.first = Matrix(grad.rows(), grad.cols());
            m.second = Matrix(grad.rows(), grad.cols());
        } else if (m.first.cols() == grad.cols() && m.first.rows() < grad.rows()) {
            // Grown parameter (the classifier head): new rows start at zero.
            const std::size_t extra = grad.rows() - m.first.rows();
            m.first = vstack(m.first, Matrix(extra, grad.cols()));
            m.second = vstack(m.second, Matrix(extra, grad.cols()));
        } else {
            m.first.require_same_shape(grad, ("Optimizer slot " + slot).c_str());
        }
        ++m.steps;
        const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(m.steps));
        const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(m.steps));
        Matrix out(grad.rows(), grad.cols());
        for (std::size_t i = 0; i < grad.size(); ++i) {
            const double g = grad.values()[i];
            double& mu = m.first.values()[i];
            double& nu = m.second.values()[i];
            mu = beta1_ * mu + (1.0 - beta1_) * g;
            nu = beta2_ * nu + (1.0 - beta2_) * g * g;
            out.values()[i] = -eta_ * (mu / c1) / (std::sqrt(nu / c2) + eps_);
        }
        return out;
    }

private:
    struct Moments {
        Matrix first;
        Matrix second;
        std::size_t steps = 0;
    };

    OptimizerKind kind_;
    double eta_;
    double beta1_;
    double beta2_;
    double eps_;
    std::map<std::string, Moments> slots_;
};

}  // namespace janus::harness

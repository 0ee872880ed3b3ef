#pragma once

// Evaluation-only measurements: null-space violation of the three update
// candidates and angular similarity of current features to old prototypes.
// Nothing here feeds back into training.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "janus/dml.hpp"
#include "janus/lora.hpp"
#include "janus/rectify.hpp"

namespace janus::harness {

struct ViolationSample {
    double naive = 0.0;
    double safe = 0.0;
    double rectified = 0.0;
};

/// Violations of the naive factor step, the ideal safe target and the
/// rectified factor step, all at the raw-gradient scale.
inline ViolationSample violation_sample(const LoraAdapter& adapter, const Matrix& grad_w, const Matrix& v,
                                        const Matrix& x_ref, const RectifyConfig& cfg) {
    const FactorPair naive = factor_grads(adapter, grad_w);
    const Matrix safe = safe_project(grad_w, v);
    const FactorPair rect = rectify(adapter, safe, cfg);
    return {violation(composite_update(adapter, naive.a, naive.b), x_ref), violation(safe, x_ref),
            violation(composite_update(adapter, rect.a, rect.b), x_ref)};
}

/// Reference rows replaced by their reconstruction in span(V).
inline Matrix reconstruct_in_span(const Matrix& x_ref, const Matrix& v) { return matmul_nt(matmul(x_ref, v), v); }

struct AngularRecord {
    double cos_old_max = 0.0;
    double cos_own = 0.0;
    bool in_danger = false;
};

inline constexpr double kDangerThreshold = 0.5;
inline constexpr std::size_t kHistogramBins = 50;

struct AngularSummary {
    std::vector<AngularRecord> records;
    double danger_fraction = 0.0;
    std::array<std::size_t, kHistogramBins> histogram{};  // cos_old_max over [-1, 1]
};

/// Own-class similarity uses the live prototype when present, else the
/// frozen one.
inline AngularSummary angular_diagnostics(const Matrix& z, std::span<const ClassId> labels, const PrototypeBank& bank) {
    if (bank.past().empty()) throw ProtocolError("angular_diagnostics: no frozen prototypes");
    if (labels.size() != z.rows()) throw ShapeError("angular_diagnostics: label count != rows");
    AngularSummary out;
    std::size_t danger = 0;
    for (std::size_t i = 0; i < z.rows(); ++i) {
        const auto row = z.row(i);
        auto cosine = [&](const Prototype& p) {
            double acc = 0.0;
            for (std::size_t j = 0; j < row.size(); ++j) acc += row[j] * p[j];
            return std::clamp(acc, -1.0, 1.0);
        };
        AngularRecord rec;
        rec.cos_old_max = -1.0;
        for (const auto& [cls, p] : bank.past()) rec.cos_old_max = std::max(rec.cos_old_max, cosine(p));
        const auto live = bank.live().find(labels[i]);
        if (live != bank.live().end()) {
            rec.cos_own = cosine(live->second);
        } else {
            const auto past = bank.past().find(labels[i]);
            if (past == bank.past().end()) {
                throw ProtocolError("angular_diagnostics: class " + std::to_string(labels[i]) + " has no prototype");
            }
            rec.cos_own = cosine(past->second);
        }
        rec.in_danger = rec.cos_old_max > kDangerThreshold;
        if (rec.in_danger) ++danger;
        const auto bin = static_cast<std::size_t>((rec.cos_old_max + 1.0) / 2.0 * kHistogramBins);
        ++out.histogram[std::min(bin, kHistogramBins - 1)];
        out.records.push_back(rec);
    }
    out.danger_fraction = z.rows() ? static_cast<double>(danger) / static_cast<double>(z.rows()) : 0.0;
    return out;
}

}  // namespace janus::harness

#pragma once

// Multi-run drivers: the seven-row ablation, seed or hyperparameter sweeps,
// and re-running diagnostics from a checkpoint.

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "janus/harness/report.hpp"
#include "janus/harness/trainer.hpp"

namespace janus::harness {

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

/// Sample standard deviation; zero for a single value.
inline MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd out;
    if (xs.empty()) return out;
    out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    if (xs.size() < 2) return out;
    double sq = 0.0;
    for (double x : xs) sq += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(sq / static_cast<double>(xs.size() - 1));
    return out;
}

struct VariantSummary {
    std::string variant;
    MeanStd acc;
    MeanStd maa;
    MeanStd bwt;
};

struct AblationResult {
    std::vector<MetricsRow> rows;
    std::vector<VariantSummary> summary;
};

inline ExperimentConfig with_variant(ExperimentConfig cfg, const VariantSpec& v) {
    cfg.variant = v.flags;
    cfg.baseline = Baseline::janus;
    return cfg;
}

/// Seeds cfg.seed, cfg.seed + 1, ... for every ablation row.
inline AblationResult run_ablation(const ExperimentConfig& cfg, std::size_t n_seeds,
                                   const std::vector<VariantSpec>& variants = ablation_variants()) {
    AblationResult out;
    for (const auto& v : variants) {
        std::vector<double> acc, m, b;
        for (std::size_t s = 0; s < n_seeds; ++s) {
            ExperimentConfig run = with_variant(cfg, v);
            run.seed = cfg.seed + s;
            const RunResult r = run_experiment(run);
            out.rows.push_back(metrics_row(v.name, run.seed, r.state.accuracy));
            acc.push_back(out.rows.back().acc);
            m.push_back(out.rows.back().maa);
            b.push_back(out.rows.back().bwt);
        }
        out.summary.push_back({v.name, mean_std(acc), mean_std(m), mean_std(b)});
    }
    return out;
}

inline std::string summary_csv(const std::vector<VariantSummary>& rows) {
    std::ostringstream out;
    out << "variant,ACC_mean,ACC_std,MAA_mean,MAA_std,BWT_mean,BWT_std\n";
    for (const auto& r : rows) {
        out << r.variant << "," << fmt10(r.acc.mean) << "," << fmt10(r.acc.std) << "," << fmt10(r.maa.mean) << ","
            << fmt10(r.maa.std) << "," << fmt10(r.bwt.mean) << "," << fmt10(r.bwt.std) << "\n";
    }
    return out.str();
}

struct DiagnoseResult {
    std::vector<double> accuracy_row;
    std::vector<AngularRow> angular;
    double danger_fraction = 0.0;
    std::array<std::size_t, kHistogramBins> histogram{};
    std::vector<ViolationRow> violation;
    std::vector<ViolationRow> violation_raw;
};

/// Recomputes evaluation-side diagnostics for the last completed task of a
/// checkpoint: accuracy on every task, angular similarity of the last
/// task's test features to earlier prototypes, and the violation of each
/// update candidate on the last task's batches against the basis that was
/// in force while it trained.
inline DiagnoseResult diagnose(const Checkpoint& ck) {
    if (ck.tasks_done == 0) throw ProtocolError("diagnose: checkpoint has no completed task");
    const std::size_t last = ck.tasks_done - 1;
    TaskStream stream(synth_stream(ck.cfg));
    RunState st = make_state(ck.cfg);
    st.net = ck.net;
    DiagnoseResult out;
    out.accuracy_row = evaluate(st, stream, last);

    const Task& view = stream.eval_view(last);
    PrototypeBank bank(ck.bank.dim(), ck.bank.momentum());
    for (const auto& [cls, p] : ck.bank.past()) {
        const bool current = std::find(view.class_ids.begin(), view.class_ids.end(), cls) != view.class_ids.end();
        if (current) bank.set_live(cls, p);
        else bank.set_past(cls, p);
    }
    if (!bank.past().empty()) {
        const ForwardResult f = forward(st.net, view.test.x);
        const AngularSummary s = angular_diagnostics(f.features, view.test.y, bank);
        for (const auto& r : s.records) out.angular.push_back({last, r});
        out.danger_fraction = s.danger_fraction;
        out.histogram = s.histogram;
    }

    if (last == 0 || ck.protection_history.size() < last) return out;
    const std::vector<Matrix>& basis = ck.protection_history[last - 1];
    std::vector<Matrix> reference(st.net.depth(), Matrix(0, 0));
    for (std::size_t i = 0; i < last; ++i) {
        const Matrix& x = stream.eval_view(i).test.x;
        std::vector<std::size_t> rows(std::min(ck.cfg.ref_samples, x.rows()));
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        const ForwardResult f = forward(st.net, gather_rows(x, rows));
        for (std::size_t l = 0; l < st.net.depth(); ++l) reference[l] = vstack(reference[l], f.cache.inputs[l]);
    }
    const Matrix& train_x = stream.eval_view(last).train.x;
    const auto& train_y = stream.eval_view(last).train.y;
    std::size_t step = 0;
    for (std::size_t start = 0; start < train_x.rows(); start += ck.cfg.batch_size, ++step) {
        std::vector<std::size_t> rows;
        for (std::size_t r = start; r < std::min(train_x.rows(), start + ck.cfg.batch_size); ++r) rows.push_back(r);
        std::vector<ClassId> labels;
        for (std::size_t r : rows) labels.push_back(train_y[r]);
        const ForwardResult f = forward(st.net, gather_rows(train_x, rows));
        const Gradients g = backward(st.net, f.cache, task_loss(st, f.logits, labels).dlogits, Matrix());
        for (std::size_t l = 0; l < st.net.depth(); ++l) {
            if (basis[l].cols() == 0 || reference[l].rows() == 0) continue;
            const LoraAdapter& ad = st.net.layers()[l].adapter;
            out.violation.push_back(
                {step, l, violation_sample(ad, g.weight[l], basis[l], reconstruct_in_span(reference[l], basis[l]), ck.cfg.rectify)});
            out.violation_raw.push_back({step, l, violation_sample(ad, g.weight[l], basis[l], reference[l], ck.cfg.rectify)});
        }
    }
    return out;
}

}  // namespace janus::harness

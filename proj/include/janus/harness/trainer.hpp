#pragma once

// The integrated update loop over a task stream.
//
// Per batch: forward, task loss plus optional margin loss, backward, then
// for each adapted layer the full-matrix gradient is optionally projected
// away from the protection basis and turned into factor steps either by
// rectification or by the plain factor gradients. The head is trained
// directly. After the optimizer step the online estimators see the
// batch's cached layer inputs and the prototype bank absorbs the features.

#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "janus/harness/config.hpp"
#include "janus/harness/data.hpp"
#include "janus/harness/diagnostics.hpp"
#include "janus/harness/metrics.hpp"
#include "janus/harness/optimizer.hpp"
#include "janus/model.hpp"
#include "janus/rectify.hpp"
#include "janus/subspace.hpp"

namespace janus::harness {

struct ViolationRow {
    std::size_t step = 0;
    std::size_t layer = 0;
    ViolationSample value;
};

struct AngularRow {
    std::size_t task = 0;
    AngularRecord record;
};

struct RunLog {
    std::vector<ViolationRow> violation;      // references reconstructed in span(V)
    std::vector<ViolationRow> violation_raw;  // raw reference activations
    std::vector<AngularRow> angular;
    std::vector<double> danger_fraction;      // one entry per task >= 1
    std::array<std::size_t, kHistogramBins> histogram{};
};

struct RunState {
    ExperimentConfig cfg;
    ToyNet net;
    PrototypeBank bank;
    std::vector<OnlineEstimator> estimators;
    std::vector<Matrix> protection;      // per layer, D x k (D x 0 before the first boundary)
    std::vector<std::vector<Matrix>> protection_history;  // protection after each task
    std::vector<Matrix> gpm_store;       // per layer, stored activations for the offline baseline
    std::vector<Matrix> reference;       // per layer, evaluation-only past activations
    Optimizer optimizer;
    Rng shuffle_rng;
    std::size_t step = 0;
    std::size_t tasks_done = 0;
    AccuracyMatrix accuracy;
    RunLog log;
};

inline constexpr std::uint64_t kModelSeedSalt = 0x243f6a8885a308d3ULL;
inline constexpr std::uint64_t kShuffleSeedSalt = 0x13198a2e03707344ULL;

inline RunState make_state(const ExperimentConfig& cfg) {
    cfg.validate();
    Rng model_rng(cfg.seed ^ kModelSeedSalt);
    std::vector<std::size_t> widths(cfg.depth, cfg.width);
    RunState st{cfg,
                ToyNet::make(cfg.dim, widths, cfg.lora_rank, cfg.lora_scale, model_rng),
                PrototypeBank(cfg.depth > 0 ? cfg.width : cfg.dim, cfg.momentum),
                {},
                {},
                {},
                {},
                {},
                Optimizer(cfg),
                Rng(cfg.seed ^ kShuffleSeedSalt),
                0,
                0,
                {},
                {}};
    for (std::size_t l = 0; l < cfg.depth; ++l) {
        const std::size_t d_in = st.net.layers()[l].adapter.d_in();
        st.estimators.emplace_back(d_in, cfg.oe_rank, cfg.oe_eta, l, cfg.seed + l);
        st.protection.emplace_back(d_in, 0);
        st.gpm_store.emplace_back(0, 0);
        st.reference.emplace_back(0, 0);
    }
    return st;
}

inline std::vector<std::size_t> rows_of_class(std::span<const ClassId> labels, ClassId cls) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == cls) rows.push_back(i);
    return rows;
}

/// Factor-space step surrogate for one layer given its raw gradient.
inline FactorPair layer_step_direction(const RunState& st, std::size_t l, const Matrix& grad_w) {
    const VariantFlags flags = st.cfg.effective_flags();
    const LoraAdapter& adapter = st.net.layers()[l].adapter;
    const Matrix& v = st.protection[l];
    const bool protect = flags.use_oe && v.cols() > 0;
    const Matrix target = protect ? safe_project(grad_w, v) : grad_w;
    if (flags.use_gr) return rectify(adapter, target, st.cfg.rectify);
    FactorPair g = factor_grads(adapter, target);
    if (protect) g.a = safe_project(g.a, v);
    return g;
}

/// Cross-entropy over every head row, or over the current task's rows only
/// (old-class logits then receive no gradient).
inline CrossEntropy task_loss(const RunState& st, const Matrix& logits, std::span<const ClassId> labels) {
    if (!st.cfg.task_local_loss) return cross_entropy(logits, labels);
    const std::size_t cpt = st.cfg.classes_per_task;
    const std::size_t first = logits.cols() - cpt;
    std::vector<ClassId> local(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < static_cast<ClassId>(first)) throw ProtocolError("task_loss: label from a completed task");
        local[i] = labels[i] - static_cast<ClassId>(first);
    }
    CrossEntropy part = cross_entropy(columns(logits, first, cpt), local);
    Matrix full(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < logits.rows(); ++i)
        for (std::size_t j = 0; j < cpt; ++j) full(i, first + j) = part.dlogits(i, j);
    return {part.loss, std::move(full)};
}

/// One optimization step on a batch of the current task.
inline void train_step(RunState& st, const LabeledSet& batch) {
    const VariantFlags flags = st.cfg.effective_flags();
    const ForwardResult fwd = forward(st.net, batch.x);
    const CrossEntropy ce = task_loss(st, fwd.logits, batch.y);

    const std::set<ClassId> classes(batch.y.begin(), batch.y.end());
    std::set<ClassId> fresh;
    for (ClassId cls : classes) {
        if (!st.bank.live().contains(cls)) {
            st.bank.update_live(cls, gather_rows(fwd.features, rows_of_class(batch.y, cls)));
            fresh.insert(cls);
        }
    }

    Matrix dz;
    if (flags.use_dml) {
        dz = dml_loss(fwd.features, batch.y, st.bank, st.cfg.dml).dz;
        dz *= st.cfg.dml.lambda;
    }
    const Gradients grads = backward(st.net, fwd.cache, ce.dlogits, dz);

    const bool log_now = st.step % st.cfg.log_every == 0;
    for (std::size_t l = 0; l < st.net.depth(); ++l) {
        const Matrix& v = st.protection[l];
        if (log_now && v.cols() > 0 && st.reference[l].rows() > 0) {
            const LoraAdapter& adapter = st.net.layers()[l].adapter;
            st.log.violation.push_back({st.step, l,
                                        violation_sample(adapter, grads.weight[l], v,
                                                         reconstruct_in_span(st.reference[l], v), st.cfg.rectify)});
            st.log.violation_raw.push_back(
                {st.step, l, violation_sample(adapter, grads.weight[l], v, st.reference[l], st.cfg.rectify)});
        }
        const FactorPair g = layer_step_direction(st, l, grads.weight[l]);
        const Matrix da = st.optimizer.increment("A" + std::to_string(l), g.a);
        const Matrix db = st.optimizer.increment("B" + std::to_string(l), g.b);
        st.net.apply_layer_update(l, da, db);
    }
    st.net.apply_head_update(st.optimizer.increment("head", grads.head));

    if (flags.use_oe && st.cfg.baseline == Baseline::janus) {
        for (std::size_t l = 0; l < st.net.depth(); ++l) st.estimators[l].step(fwd.cache.inputs[l]);
    }
    for (ClassId cls : classes) {
        if (!fresh.contains(cls)) st.bank.update_live(cls, gather_rows(fwd.features, rows_of_class(batch.y, cls)));
    }
    ++st.step;
}

inline std::size_t argmax_row(const Matrix& m, std::size_t i) {
    const auto row = m.row(i);
    return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

/// Class-incremental accuracy on each seen task, argmax over every head row.
inline std::vector<double> evaluate(const RunState& st, const TaskStream& stream, std::size_t upto) {
    std::vector<double> row;
    for (std::size_t i = 0; i <= upto; ++i) {
        const Task& task = stream.eval_view(i);
        const Matrix logits = forward(st.net, task.test.x).logits;
        std::size_t hits = 0;
        for (std::size_t n = 0; n < task.test.y.size(); ++n) {
            if (logits.cols() > 0 && static_cast<ClassId>(argmax_row(logits, n)) == task.test.y[n]) ++hits;
        }
        row.push_back(task.test.y.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(task.test.y.size()));
    }
    return row;
}

/// Task boundary: new protection bases, frozen prototypes, diagnostics.
inline void finish_task(RunState& st, TaskStream& stream, std::size_t t) {
    const VariantFlags flags = st.cfg.effective_flags();
    const Task& view = stream.eval_view(t);

    if (!st.bank.past().empty()) {
        const ForwardResult f = forward(st.net, view.test.x);
        const AngularSummary summary = angular_diagnostics(f.features, view.test.y, st.bank);
        for (const auto& rec : summary.records) st.log.angular.push_back({t, rec});
        st.log.danger_fraction.push_back(summary.danger_fraction);
        st.log.histogram = summary.histogram;
    }

    if (flags.use_oe) {
        if (st.cfg.baseline == Baseline::offline_svd_gpm) {
            std::vector<std::size_t> all(stream.train_size(t));
            std::iota(all.begin(), all.end(), std::size_t{0});
            const LabeledSet data = stream.train_batch(t, all);
            const ForwardResult f = forward(st.net, data.x);
            for (std::size_t l = 0; l < st.net.depth(); ++l) {
                st.gpm_store[l] = vstack(st.gpm_store[l], f.cache.inputs[l]);
                st.protection[l] = offline_svd_basis(st.gpm_store[l], st.cfg.oe_rank);
            }
        } else {
            for (std::size_t l = 0; l < st.net.depth(); ++l) st.protection[l] = st.estimators[l].snapshot(t).v();
        }
    }

    st.protection_history.push_back(st.protection);

    if (st.cfg.ref_samples > 0) {
        const std::size_t n = std::min(st.cfg.ref_samples, view.test.x.rows());
        std::vector<std::size_t> rows(n);
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        const ForwardResult f = forward(st.net, gather_rows(view.test.x, rows));
        for (std::size_t l = 0; l < st.net.depth(); ++l) st.reference[l] = vstack(st.reference[l], f.cache.inputs[l]);
    }

    st.bank.freeze();
    st.accuracy.append_row(evaluate(st, stream, t));
    st.tasks_done = t + 1;
}

inline void train_task(RunState& st, TaskStream& stream, std::size_t t) {
    if (t != st.tasks_done) {
        throw ProtocolError("train_task: task " + std::to_string(t) + " out of order (expected " +
                            std::to_string(st.tasks_done) + ")");
    }
    stream.begin_task(t);
    st.net.expand_head(st.cfg.classes_per_task);
    st.optimizer.reset();

    const std::size_t n = stream.train_size(t);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t epoch = 0; epoch < st.cfg.epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i) {
            std::uniform_int_distribution<std::size_t> pick(0, i - 1);
            std::swap(order[i - 1], order[pick(st.shuffle_rng)]);
        }
        for (std::size_t start = 0; start < n; start += st.cfg.batch_size) {
            const std::size_t stop = std::min(n, start + st.cfg.batch_size);
            const std::span<const std::size_t> rows(order.data() + start, stop - start);
            train_step(st, stream.train_batch(t, rows));
        }
    }
    finish_task(st, stream, t);
}

struct RunResult {
    RunState state;
    std::size_t completed_reads = 0;
    std::size_t training_reads = 0;
};

inline RunResult run_experiment(const ExperimentConfig& cfg) {
    TaskStream stream(synth_stream(cfg));
    RunState st = make_state(cfg);
    for (std::size_t t = 0; t < cfg.tasks; ++t) train_task(st, stream, t);
    return {std::move(st), stream.completed_reads(), stream.training_reads()};
}

}  // namespace janus::harness

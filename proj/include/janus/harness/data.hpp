#pragma once

// Synthetic class-incremental stream and the data layer that guards it.
//
// Each class is an isotropic Gaussian cluster around a seeded mean. The
// mean is a random unit direction scaled by the separation factor plus an
// optional offset shared by every class, which makes the tasks' activation
// subspaces overlap.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "janus/dml.hpp"
#include "janus/harness/config.hpp"
#include "janus/matrix.hpp"
#include "janus/random.hpp"

namespace janus::harness {

struct LabeledSet {
    Matrix x;
    std::vector<ClassId> y;
};

struct Task {
    std::size_t id = 0;
    std::vector<ClassId> class_ids;
    LabeledSet train;
    LabeledSet test;
};

inline constexpr std::uint64_t kDataSeedSalt = 0x9e3779b97f4a7c15ULL;

inline std::vector<Task> synth_stream(const ExperimentConfig& cfg) {
    Rng rng(cfg.seed ^ kDataSeedSalt);
    const std::size_t d = cfg.dim;
    const std::size_t n_train = cfg.samples_per_class * 4 / 5;
    const std::size_t n_test = cfg.samples_per_class - n_train;

    auto unit_direction = [&] {
        Matrix g = gaussian_matrix(1, d, 1.0, rng);
        const double n = frobenius_norm(g);
        g *= 1.0 / n;
        return g;
    };
    const Matrix offset = unit_direction();

    std::vector<Task> tasks(cfg.tasks);
    for (std::size_t t = 0; t < cfg.tasks; ++t) {
        Task& task = tasks[t];
        task.id = t;
        task.train.x = Matrix(n_train * cfg.classes_per_task, d);
        task.test.x = Matrix(n_test * cfg.classes_per_task, d);
        for (std::size_t c = 0; c < cfg.classes_per_task; ++c) {
            const auto cls = static_cast<ClassId>(t * cfg.classes_per_task + c);
            task.class_ids.push_back(cls);
            Matrix mean = cfg.separation * unit_direction();
            mean += cfg.shared * offset;
            const Matrix samples = gaussian_matrix(cfg.samples_per_class, d, cfg.noise, rng);
            for (std::size_t i = 0; i < cfg.samples_per_class; ++i) {
                const bool is_train = i < n_train;
                Matrix& dst = is_train ? task.train.x : task.test.x;
                // Interleave classes so contiguous slices stay balanced.
                const std::size_t row = (is_train ? i : i - n_train) * cfg.classes_per_task + c;
                for (std::size_t j = 0; j < d; ++j) dst(row, j) = mean(0, j) + samples(i, j);
            }
        }
        for (std::size_t i = 0; i < n_train; ++i)
            for (ClassId cls : task.class_ids) task.train.y.push_back(cls);
        for (std::size_t i = 0; i < n_test; ++i)
            for (ClassId cls : task.class_ids) task.test.y.push_back(cls);
    }
    return tasks;
}

/// Serves training batches in task order and records every training-path
/// read of a task that has already been completed. Evaluation reads go
/// through a separate, untracked accessor.
class TaskStream {
public:
    explicit TaskStream(std::vector<Task> tasks) : tasks_(std::move(tasks)) {}

    std::size_t size() const noexcept { return tasks_.size(); }
    std::size_t current() const noexcept { return current_; }
    bool started() const noexcept { return started_; }
    std::size_t completed_reads() const noexcept { return completed_reads_; }
    std::size_t training_reads() const noexcept { return training_reads_; }

    void begin_task(std::size_t t) {
        const std::size_t expected = started_ ? current_ + 1 : 0;
        if (t != expected) {
            throw ProtocolError("TaskStream: task " + std::to_string(t) + " out of order (expected " +
                                std::to_string(expected) + ")");
        }
        if (t >= tasks_.size()) throw ProtocolError("TaskStream: task " + std::to_string(t) + " does not exist");
        current_ = t;
        started_ = true;
    }

    std::size_t train_size(std::size_t t) const { return tasks_.at(t).train.y.size(); }

    LabeledSet train_batch(std::size_t t, std::span<const std::size_t> rows) {
        if (!started_ || t > current_) throw ProtocolError("TaskStream: task " + std::to_string(t) + " not started");
        if (t < current_) completed_reads_ += rows.size();
        training_reads_ += rows.size();
        const Task& task = tasks_[t];
        LabeledSet out{gather_rows(task.train.x, rows), {}};
        out.y.reserve(rows.size());
        for (std::size_t r : rows) out.y.push_back(task.train.y.at(r));
        return out;
    }

    /// Untracked; for evaluation and diagnostics only.
    const Task& eval_view(std::size_t t) const { return tasks_.at(t); }

private:
    std::vector<Task> tasks_;
    std::size_t current_ = 0;
    bool started_ = false;
    std::size_t completed_reads_ = 0;
    std::size_t training_reads_ = 0;
};

}  // namespace janus::harness

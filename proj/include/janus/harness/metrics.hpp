#pragma once

#include <string>
#include <vector>

#include "janus/errors.hpp"

namespace janus::harness {

/// Lower-triangular accuracy table; row t holds accuracies on tasks 0..t
/// measured right after training on task t.
class AccuracyMatrix {
public:
    AccuracyMatrix() = default;
    explicit AccuracyMatrix(std::vector<std::vector<double>> rows) {
        for (auto& r : rows) append_row(std::move(r));
    }

    void append_row(std::vector<double> row) {
        if (row.size() != rows_.size() + 1) {
            throw ProtocolError("AccuracyMatrix: row " + std::to_string(rows_.size()) + " needs " +
                                std::to_string(rows_.size() + 1) + " entries, got " + std::to_string(row.size()));
        }
        for (double v : row)
            if (!(v >= 0.0 && v <= 1.0)) throw ProtocolError("AccuracyMatrix: entry outside [0, 1]");
        rows_.push_back(std::move(row));
    }

    std::size_t tasks() const noexcept { return rows_.size(); }
    double operator()(std::size_t t, std::size_t i) const { return rows_.at(t).at(i); }
    const std::vector<std::vector<double>>& rows() const noexcept { return rows_; }
    bool operator==(const AccuracyMatrix&) const = default;

private:
    std::vector<std::vector<double>> rows_;
};

inline double acc_final(const AccuracyMatrix& a) {
    if (a.tasks() == 0) throw ProtocolError("acc_final: empty accuracy matrix");
    const auto& last = a.rows().back();
    double sum = 0.0;
    for (double v : last) sum += v;
    return sum / static_cast<double>(last.size());
}

inline double maa(const AccuracyMatrix& a) {
    if (a.tasks() == 0) throw ProtocolError("maa: empty accuracy matrix");
    double outer = 0.0;
    for (const auto& row : a.rows()) {
        double inner = 0.0;
        for (double v : row) inner += v;
        outer += inner / static_cast<double>(row.size());
    }
    return outer / static_cast<double>(a.tasks());
}

inline double bwt(const AccuracyMatrix& a) {
    const std::size_t t = a.tasks();
    if (t < 2) throw ProtocolError("bwt: undefined for fewer than two tasks");
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < t; ++i) sum += a(t - 1, i) - a(i, i);
    return sum / static_cast<double>(t - 1);
}

}  // namespace janus::harness

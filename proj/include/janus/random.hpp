#pragma once

#include <cstdint>
#include <random>

#include "janus/matrix.hpp"

namespace janus {

using Rng = std::mt19937_64;

inline Matrix gaussian_matrix(std::size_t rows, std::size_t cols, double stddev, Rng& rng) {
    std::normal_distribution<double> dist(0.0, stddev);
    Matrix m(rows, cols);
    for (double& v : m.values()) v = dist(rng);
    return m;
}

/// Haar-ish random d x k matrix with orthonormal columns.
inline Matrix random_orthonormal(std::size_t d, std::size_t k, Rng& rng) {
    if (k == 0) return Matrix(d, 0);
    return qr_thin(gaussian_matrix(d, k, 1.0, rng)).q;
}

}  // namespace janus

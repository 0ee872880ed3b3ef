#pragma once

// Built-in oracle checks run by `janus_cli selftest`. Each check compares a
// library routine against an independent computation.

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "janus/model.hpp"
#include "janus/rectify.hpp"
#include "janus/subspace.hpp"

namespace janus::selftest {

struct Check {
    std::string name;
    std::function<double()> measure;  // returns the observed error
    double tolerance;
};

inline Matrix finite_difference(const std::function<double(const Matrix&)>& f, const Matrix& at, double h = 1e-6) {
    Matrix grad(at.rows(), at.cols());
    Matrix probe = at;
    for (std::size_t i = 0; i < at.size(); ++i) {
        const double orig = probe.values()[i];
        probe.values()[i] = orig + h;
        const double up = f(probe);
        probe.values()[i] = orig - h;
        const double down = f(probe);
        probe.values()[i] = orig;
        grad.values()[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

inline double rel(const Matrix& a, const Matrix& b) {
    return frobenius_norm(a - b) / std::max({frobenius_norm(a), frobenius_norm(b), 1e-12});
}

inline std::vector<Check> checks() {
    std::vector<Check> out;
    out.push_back({"recon_grad vs finite differences", [] {
                       Rng rng(1);
                       double worst = 0.0;
                       for (int i = 0; i < 10; ++i) {
                           const Matrix v = random_orthonormal(8, 3, rng);
                           const Matrix x = gaussian_matrix(12, 8, 1.0, rng);
                           const Matrix fd = finite_difference([&](const Matrix& p) { return recon_loss(p, x); }, v);
                           worst = std::max(worst, rel(recon_grad(v, x), fd));
                       }
                       return worst;
                   },
                   1e-5});
    out.push_back({"dml_loss dZ vs finite differences", [] {
                       Rng rng(2);
                       PrototypeBank bank(5);
                       for (ClassId c = 0; c < 3; ++c) {
                           const Matrix p = normalize_features(gaussian_matrix(1, 5, 1.0, rng));
                           bank.set_live(c, {p.values().begin(), p.values().end()});
                       }
                       const Matrix past = normalize_features(gaussian_matrix(1, 5, 1.0, rng));
                       bank.set_past(9, {past.values().begin(), past.values().end()});
                       const Matrix z = normalize_features(gaussian_matrix(6, 5, 1.0, rng));
                       const std::vector<ClassId> labels{0, 1, 2, 0, 1, 2};
                       const DmlConfig cfg{0.3, 0.5, 1.0};
                       const Matrix fd =
                           finite_difference([&](const Matrix& p) { return dml_loss(p, labels, bank, cfg).loss; }, z);
                       return rel(dml_loss(z, labels, bank, cfg).dz, fd);
                   },
                   1e-5});
    out.push_back({"backward G_W vs finite differences", [] {
                       Rng rng(3);
                       ToyNet net = ToyNet::make(5, {6, 6}, 2, 1.0, rng);
                       net.expand_head(3);
                       net.apply_head_update(gaussian_matrix(3, 6, 1.0, rng));
                       net.apply_layer_update(0, Matrix(2, 5), gaussian_matrix(6, 2, 0.3, rng));
                       const Matrix x = gaussian_matrix(4, 5, 1.0, rng);
                       const std::vector<ClassId> labels{0, 1, 2, 1};
                       const ForwardResult f = forward(net, x);
                       const Gradients g = backward(net, f.cache, cross_entropy(f.logits, labels).dlogits, Matrix());
                       double worst = 0.0;
                       for (std::size_t l = 0; l < net.depth(); ++l) {
                           const Matrix fd = finite_difference(
                               [&](const Matrix& w0) {
                                   std::vector<AdaptedLayer> layers = net.layers();
                                   const LoraAdapter& ad = layers[l].adapter;
                                   layers[l].adapter = LoraAdapter(w0, ad.a(), ad.b(), ad.scale());
                                   return cross_entropy(forward(ToyNet(layers, net.head()), x).logits, labels).loss;
                               },
                               net.layers()[l].adapter.base());
                           worst = std::max(worst, rel(g.weight[l], fd));
                       }
                       return worst;
                   },
                   1e-4});
    out.push_back({"offline SVD recovers a planted subspace", [] {
                       Rng rng(4);
                       const Matrix u = random_orthonormal(10, 3, rng);
                       Matrix z = gaussian_matrix(50, 3, 1.0, rng);
                       for (std::size_t i = 0; i < 50; ++i) {
                           z(i, 0) *= 5.0;
                           z(i, 1) *= 3.0;
                           z(i, 2) *= 2.0;
                       }
                       return subspace_distance(offline_svd_basis(matmul_nt(z, u), 3), u);
                   },
                   1e-6});
    out.push_back({"rectify stage one vs ridge normal equations", [] {
                       Rng rng(5);
                       const LoraAdapter ad(gaussian_matrix(6, 7, 1.0, rng), gaussian_matrix(3, 7, 1.0, rng),
                                            gaussian_matrix(6, 3, 1.0, rng), 1.0);
                       const Matrix g = gaussian_matrix(6, 7, 1.0, rng);
                       const FactorPair r = rectify(ad, g, RectifyConfig{1e-6});
                       // Residual of the normal equations (BᵀB + δI) dA = BᵀG.
                       Matrix lhs = matmul_tn(ad.b(), ad.b());
                       for (std::size_t i = 0; i < 3; ++i) lhs(i, i) += 1e-6;
                       return frobenius_norm(matmul(lhs, r.a) - matmul_tn(ad.b(), g));
                   },
                   1e-8});
    out.push_back({"safe projection annihilates the basis", [] {
                       Rng rng(6);
                       const Matrix v = random_orthonormal(9, 4, rng);
                       const Matrix g = gaussian_matrix(5, 9, 3.0, rng);
                       return frobenius_norm(matmul(safe_project(g, v), v)) / std::max(1.0, frobenius_norm(g));
                   },
                   1e-10});
    out.push_back({"QR retraction keeps the basis orthonormal", [] {
                       Rng rng(7);
                       OnlineEstimator est(8, 3, 1e-2, 0);
                       for (int i = 0; i < 200; ++i) est.step(gaussian_matrix(16, 8, 1.0, rng));
                       return frobenius_norm(matmul_tn(est.v(), est.v()) - Matrix::identity(3));
                   },
                   1e-10});
    return out;
}

/// Prints one PASS/FAIL line per check; returns the number of failures.
inline int run(std::FILE* out) {
    int failures = 0;
    for (const Check& c : checks()) {
        double err = 0.0;
        bool ok = false;
        try {
            err = c.measure();
            ok = std::isfinite(err) && err <= c.tolerance;
        } catch (const std::exception& e) {
            std::fprintf(out, "FAIL  %-45s threw: %s\n", c.name.c_str(), e.what());
            ++failures;
            continue;
        }
        std::fprintf(out, "%s  %-45s error %.3g (tol %.0e)\n", ok ? "PASS" : "FAIL", c.name.c_str(), err, c.tolerance);
        if (!ok) ++failures;
    }
    return failures;
}

}  // namespace janus::selftest

// Acceptance gate: one PASS/FAIL line per criterion, with the measured
// quantities and wall time. Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "janus/harness/experiments.hpp"
#include "oracles.hpp"

using namespace janus;
using namespace janus::harness;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [violated]");
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double median(std::vector<double> xs) {
    if (xs.empty()) return HUGE_VAL;
    const std::size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
    double m = xs[mid];
    if (xs.size() % 2 == 0) m = 0.5 * (m + *std::max_element(xs.begin(), xs.begin() + mid));
    return m;
}

LoraAdapter random_adapter(Rng& rng, std::size_t d_out, std::size_t d_in, std::size_t r, double s, double b_std) {
    return LoraAdapter(gaussian_matrix(d_out, d_in, 1.0, rng), gaussian_matrix(r, d_in, 1.0 / std::sqrt(double(d_in)), rng),
                       gaussian_matrix(d_out, r, b_std, rng), s);
}

Prototype unit_vector(std::size_t d, Rng& rng) {
    const Matrix p = normalize_features(gaussian_matrix(1, d, 1.0, rng));
    return {p.values().begin(), p.values().end()};
}

// ---------------------------------------------------------------------------

Outcome safe_projection() {
    Outcome out;
    Rng rng(101);
    double worst_null = 0.0, worst_oracle = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = 4 + trial % 29;
        const std::size_t k = 1 + trial % std::min<std::size_t>(d - 1, 10);
        const Matrix g = gaussian_matrix(2 + trial % 9, d, 1.0 + trial % 5, rng);
        const Matrix v = random_orthonormal(d, k, rng);
        const Matrix p = safe_project(g, v);
        worst_null = std::max(worst_null, frobenius_norm(matmul(p, v)) / std::max(1.0, frobenius_norm(g)));

        // Activations as columns spanning V; projector X(XᵀX)⁻¹Xᵀ.
        const Matrix x = oracle::naive_matmul(v, gaussian_matrix(k, k, 1.0, rng) + 3.0 * Matrix::identity(k));
        const Matrix xt = oracle::naive_transpose(x);
        const Matrix proj = oracle::naive_matmul(x, oracle::dense_solve(oracle::naive_matmul(xt, x), xt));
        worst_oracle = std::max(worst_oracle, oracle::max_abs_diff(p, g - oracle::naive_matmul(g, proj)));
    }
    out.require(worst_null <= 1e-10, "max ||PV||/max(1,||G||) = " + fmt("%.2e", worst_null));
    out.require(worst_oracle <= 1e-8, "max |P - Lagrangian| = " + fmt("%.2e", worst_oracle));
    return out;
}

Outcome rectification() {
    Outcome out;
    Rng rng(202);
    double worst_fit = 0.0, worst_bound = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t r = 1 + trial % 8;
        const std::size_t d_in = r + 1 + (trial * 5) % (32 - r);
        const std::size_t d_out = r + 1 + (trial * 11) % (32 - r);
        const double s = 0.5 + 0.5 * (trial % 4);
        const RectifyConfig cfg{};
        const LoraAdapter ad = random_adapter(rng, d_out, d_in, r, s, 0.5);
        const Matrix g = gaussian_matrix(d_out, d_in, 1.0, rng);
        const FactorPair res = rectify(ad, g, cfg);

        const Matrix bt = oracle::naive_transpose(ad.b());
        Matrix normal = oracle::naive_matmul(bt, ad.b());
        for (std::size_t i = 0; i < r; ++i) normal(i, i) += cfg.delta;
        Matrix expected = oracle::dense_solve(normal, oracle::naive_matmul(bt, g));
        expected *= 1.0 / s;
        worst_fit = std::max(worst_fit, oracle::max_abs_diff(res.a, expected));

        const Matrix residual = g - s * oracle::naive_matmul(ad.b(), res.a);
        const double bn = frobenius_norm(ad.b());
        const double bound = 10.0 * cfg.delta * frobenius_norm(res.a) * (1.0 + bn * bn);
        worst_bound = std::max(worst_bound, frobenius_norm(oracle::naive_matmul(bt, residual)) / bound);
    }
    out.require(worst_fit <= 1e-8, "max |dA - ridge oracle| = " + fmt("%.2e", worst_fit));
    out.require(worst_bound <= 1.0, "max ||BᵀR|| / bound = " + fmt("%.3f", worst_bound));
    return out;
}

Outcome violation_structure() {
    Outcome out;
    Rng rng(303);
    const std::size_t d = 32, r = 4, k = 8, n = 64;
    std::vector<double> ratios;
    std::size_t wins = 0;
    double worst_safe = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const Matrix v = random_orthonormal(d, k, rng);
        const LoraAdapter ad = random_adapter(rng, d, d, r, 1.0, 0.1);
        const Matrix x_new = 2.0 * matmul_nt(gaussian_matrix(n, k, 1.0, rng), v) + gaussian_matrix(n, d, 1.0, rng);
        Matrix g = matmul_tn(gaussian_matrix(n, d, 1.0, rng), x_new);
        g *= 1.0 / double(n);
        const Matrix x_ref = matmul_nt(gaussian_matrix(n, k, 1.0, rng), v);
        const ViolationSample s = violation_sample(ad, g, v, x_ref, RectifyConfig{});
        worst_safe = std::max(worst_safe, s.safe);
        wins += s.rectified < s.naive;
        ratios.push_back(s.rectified / s.naive);
    }
    const double triple_win = double(wins) / 200.0;
    const double triple_med = median(ratios);
    out.require(triple_win >= 0.95, "triples rectified<naive " + fmt("%.3f", triple_win));
    out.require(triple_med <= 0.5, "triples median ratio " + fmt("%.3f", triple_med));

    const RunResult run = run_experiment(ExperimentConfig{});
    const auto& log = run.state.log.violation;
    ratios.clear();
    wins = 0;
    for (const auto& row : log) {
        worst_safe = std::max(worst_safe, row.value.safe);
        wins += row.value.rectified < row.value.naive;
        ratios.push_back(row.value.rectified / row.value.naive);
    }
    const double run_win = log.empty() ? 0.0 : double(wins) / double(log.size());
    out.require(!log.empty(), std::to_string(log.size()) + " logged run steps");
    out.require(run_win >= 0.95, "run rectified<naive " + fmt("%.3f", run_win));
    out.require(median(ratios) <= 0.5, "run median ratio " + fmt("%.2e", median(ratios)));
    out.require(worst_safe <= 1e-10, "max safe violation " + fmt("%.2e", worst_safe));
    return out;
}

Outcome online_estimation() {
    Outcome out;
    Rng rng(404);
    const std::size_t d = 16, k = 3;
    const Matrix u = random_orthonormal(d, k, rng);
    Matrix z = gaussian_matrix(1280, k, 1.0, rng);
    const double scales[] = {3.0, 2.5, 2.0};
    for (std::size_t i = 0; i < z.rows(); ++i)
        for (std::size_t j = 0; j < k; ++j) z(i, j) *= scales[j];
    const Matrix x_all = matmul_nt(z, u) + gaussian_matrix(z.rows(), d, 0.1, rng);

    const auto ortho = [](const Matrix& v) {
        return frobenius_norm(oracle::naive_matmul(oracle::naive_transpose(v), v) - Matrix::identity(v.cols()));
    };
    OnlineEstimator est(d, k, 1e-3, 0);
    double worst_ortho = 0.0;
    for (std::size_t step = 0; step < 1000; ++step) {
        std::vector<std::size_t> idx(32);
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = (step * 32 + i) % x_all.rows();
        est.step(gather_rows(x_all, idx));
        worst_ortho = std::max(worst_ortho, ortho(est.v()));
    }
    const double dist = subspace_distance(est.v(), offline_svd_basis(x_all, k));

    std::vector<std::size_t> first_rows(32);
    std::iota(first_rows.begin(), first_rows.end(), std::size_t{0});
    const Matrix x_fixed = gather_rows(x_all, first_rows);
    const double eta = 1e-3 / frobenius_norm(matmul_tn(x_fixed, x_fixed));
    OnlineEstimator mono(random_orthonormal(d, k, rng), eta, 0);
    double prev = recon_loss(mono.v(), x_fixed);
    double worst_rise = -HUGE_VAL;
    for (int step = 0; step < 1000; ++step) {
        mono.step(x_fixed);
        worst_ortho = std::max(worst_ortho, ortho(mono.v()));
        const double cur = recon_loss(mono.v(), x_fixed);
        worst_rise = std::max(worst_rise, cur - prev);
        prev = cur;
    }
    out.require(worst_ortho <= 1e-10, "max ||VᵀV-I|| " + fmt("%.2e", worst_ortho));
    out.require(dist <= 0.05, "distance to batch SVD " + fmt("%.2e", dist));
    out.require(worst_rise <= 1e-9, "max per-step loss rise " + fmt("%.2e", worst_rise));
    return out;
}

Outcome gradient_fidelity() {
    Outcome out;
    Rng rng(505);
    double w_factor = 0.0, w_recon = 0.0, w_dml = 0.0, w_back = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        // Factor gradients under L = ||W||², dL/dW = 2W.
        const LoraAdapter ad = random_adapter(rng, 3 + trial % 5, 2 + trial % 6, 1 + trial % 3, 0.5 + 0.1 * (trial % 7), 0.5);
        const FactorPair fg = factor_grads(ad, 2.0 * effective_weight(ad));
        const auto loss = [&](const Matrix& a, const Matrix& b) {
            return oracle::sum_of_squares(effective_weight(LoraAdapter(ad.base(), a, b, ad.scale())));
        };
        const Matrix fd_a = oracle::central_difference([&](const Matrix& a) { return loss(a, ad.b()); }, ad.a());
        const Matrix fd_b = oracle::central_difference([&](const Matrix& b) { return loss(ad.a(), b); }, ad.b());
        w_factor = std::max({w_factor, oracle::relative_error(fg.a, fd_a), oracle::relative_error(fg.b, fd_b)});

        const Matrix v = trial % 2 ? random_orthonormal(7, 3, rng) : gaussian_matrix(7, 3, 0.6, rng);
        const Matrix x = gaussian_matrix(10, 7, 1.0, rng);
        w_recon = std::max(w_recon, oracle::relative_error(recon_grad(v, x),
                                                           oracle::central_difference([&](const Matrix& p) { return recon_loss(p, x); }, v)));

        const std::size_t df = 4 + trial % 5;
        PrototypeBank bank(df);
        const int live = 2 + trial % 3;
        for (int c = 0; c < live; ++c) bank.set_live(c, unit_vector(df, rng));
        for (int c = 0; c < 1 + trial % 3; ++c) bank.set_past(100 + c, unit_vector(df, rng));
        const Matrix z = normalize_features(gaussian_matrix(5, df, 1.0, rng));
        std::vector<ClassId> labels(5);
        for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<ClassId>(i % live);
        const DmlConfig dcfg{0.3, 0.5, 1.0};
        w_dml = std::max(w_dml, oracle::relative_error(dml_loss(z, labels, bank, dcfg).dz,
                                                       oracle::central_difference(
                                                           [&](const Matrix& p) { return dml_loss(p, labels, bank, dcfg).loss; }, z)));

        // Whole network: CE + λ·DML, gradients with respect to every W and the head.
        const std::size_t depth = 1 + trial % 3;
        std::vector<std::size_t> widths;
        for (std::size_t l = 0; l < depth; ++l) widths.push_back(4 + (trial + 5 * l) % 13);
        const std::size_t d_in = 3 + trial % 5;
        ToyNet net = ToyNet::make(d_in, widths, 2, 0.8, rng);
        net.expand_head(3);
        net.apply_head_update(gaussian_matrix(3, net.feature_dim(), 1.0, rng));
        for (std::size_t l = 0; l < depth; ++l)
            net.apply_layer_update(l, Matrix(2, net.layers()[l].adapter.d_in()),
                                   gaussian_matrix(net.layers()[l].adapter.d_out(), 2, 0.3, rng));
        PrototypeBank nb(net.feature_dim());
        for (ClassId c = 0; c < 3; ++c) nb.set_live(c, unit_vector(net.feature_dim(), rng));
        nb.set_past(50, unit_vector(net.feature_dim(), rng));
        const Matrix xb = gaussian_matrix(4, d_in, 1.0, rng);
        const std::vector<ClassId> yb{0, 1, 2, 1};
        const DmlConfig ncfg{0.3, 0.5, 0.7};
        const auto rebuild = [&](std::size_t layer, const Matrix* w0, const Matrix* head) {
            std::vector<AdaptedLayer> layers = net.layers();
            if (w0) {
                const auto& a = layers[layer].adapter;
                layers[layer].adapter = LoraAdapter(*w0, a.a(), a.b(), a.scale());
            }
            return ToyNet(std::move(layers), head ? *head : net.head());
        };
        const auto total = [&](const ToyNet& n) {
            const ForwardResult f = forward(n, xb);
            return cross_entropy(f.logits, yb).loss + ncfg.lambda * dml_loss(f.features, yb, nb, ncfg).loss;
        };
        const ForwardResult f = forward(net, xb);
        Matrix dz = dml_loss(f.features, yb, nb, ncfg).dz;
        dz *= ncfg.lambda;
        const Gradients g = backward(net, f.cache, cross_entropy(f.logits, yb).dlogits, dz);
        for (std::size_t l = 0; l < depth; ++l) {
            const Matrix fd = oracle::central_difference([&](const Matrix& w) { return total(rebuild(l, &w, nullptr)); },
                                                         net.layers()[l].adapter.base());
            w_back = std::max(w_back, oracle::relative_error(g.weight[l], fd));
        }
        const Matrix fd_head =
            oracle::central_difference([&](const Matrix& h) { return total(rebuild(0, nullptr, &h)); }, net.head());
        w_back = std::max(w_back, oracle::relative_error(g.head, fd_head));
    }
    out.require(w_factor <= 1e-4, "factor_grads " + fmt("%.2e", w_factor));
    out.require(w_recon <= 1e-5, "recon_grad " + fmt("%.2e", w_recon));
    out.require(w_dml <= 1e-5, "dml dZ " + fmt("%.2e", w_dml));
    out.require(w_back <= 1e-4, "backward " + fmt("%.2e", w_back));
    return out;
}

Outcome dml_semantics() {
    Outcome out;
    PrototypeBank bank(2);
    bank.set_live(0, {1.0, 0.0});
    bank.set_live(1, {0.0, 1.0});
    bank.set_past(7, {1.0, 0.0});
    const std::vector<ClassId> one{0};
    const Matrix z{{1.0, 0.0}};
    const DmlResult hand = dml_loss(z, one, bank, DmlConfig{0.3, 0.07, 1.0});
    const double expected = std::log1p(std::exp(-1.0 / 0.07)) + 0.7;
    const Matrix fd = oracle::central_difference(
        [&](const Matrix& p) { return dml_loss(p, one, bank, DmlConfig{0.3, 0.07, 1.0}).loss; }, z);
    out.require(std::abs(hand.loss - expected) <= 1e-10, "hand case error " + fmt("%.2e", std::abs(hand.loss - expected)));
    out.require(oracle::relative_error(hand.dz, fd) <= 1e-5, "hand dZ fd " + fmt("%.2e", oracle::relative_error(hand.dz, fd)));

    // Past prototypes drawn, then samples kept only when every similarity is at or below m.
    Rng rng(606);
    int inactive_ok = 0, instances = 0;
    while (instances < 100) {
        const std::size_t d = 6;
        PrototypeBank with_past(d), without(d);
        for (ClassId c = 0; c < 2; ++c) {
            const Prototype p = unit_vector(d, rng);
            with_past.set_live(c, p);
            without.set_live(c, p);
        }
        for (ClassId c = 10; c < 13; ++c) with_past.set_past(c, unit_vector(d, rng));
        const Matrix cand = normalize_features(gaussian_matrix(4, d, 1.0, rng));
        bool below = true;
        for (std::size_t i = 0; i < cand.rows(); ++i)
            for (const auto& [cls, p] : with_past.past()) {
                double s = 0.0;
                for (std::size_t j = 0; j < d; ++j) s += cand(i, j) * p[j];
                below = below && s <= 0.3;
            }
        if (!below) continue;
        ++instances;
        const std::vector<ClassId> labels{0, 1, 0, 1};
        const DmlResult a = dml_loss(cand, labels, with_past, DmlConfig{});
        const DmlResult b = dml_loss(cand, labels, without, DmlConfig{});
        inactive_ok += a.hinge == 0.0 && a.loss == b.loss && a.dz == b.dz;
    }
    out.require(inactive_ok == instances, "hinge exactly inactive in " + std::to_string(inactive_ok) + "/" +
                                              std::to_string(instances) + " instances at m = 0.3");
    return out;
}

Outcome metric_identities() {
    Outcome out;
    const AccuracyMatrix ex(std::vector<std::vector<double>>{{0.80}, {0.70, 0.90}});
    out.require(std::abs(acc_final(ex) - 0.80) <= 1e-12, "ACC " + fmt("%.12g", acc_final(ex)));
    out.require(std::abs(maa(ex) - 0.80) <= 1e-12, "MAA " + fmt("%.12g", maa(ex)));
    out.require(std::abs(bwt(ex) + 0.10) <= 1e-12, "BWT " + fmt("%.12g", bwt(ex)));

    Rng rng(707);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t t = 2 + trial % 9;
        std::vector<std::vector<double>> rows(t);
        for (std::size_t i = 0; i < t; ++i)
            for (std::size_t j = 0; j <= i; ++j) rows[i].push_back(unit(rng));
        const AccuracyMatrix a(rows);
        // Recount with a dense square table and column-major traversal.
        std::vector<double> dense(t * t, 0.0);
        for (std::size_t i = 0; i < t; ++i)
            for (std::size_t j = 0; j <= i; ++j) dense[j * t + i] = rows[i][j];
        double last = 0.0, avg = 0.0, back = 0.0;
        for (std::size_t j = 0; j < t; ++j) last += dense[j * t + t - 1];
        for (std::size_t i = 0; i < t; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j <= i; ++j) s += dense[j * t + i];
            avg += s / double(i + 1);
        }
        for (std::size_t j = 0; j + 1 < t; ++j) back += dense[j * t + t - 1] - dense[j * t + j];
        worst = std::max({worst, std::abs(acc_final(a) - last / double(t)), std::abs(maa(a) - avg / double(t)),
                          std::abs(bwt(a) - back / double(t - 1))});
    }
    out.require(worst <= 1e-12, "recount max error " + fmt("%.2e", worst));
    return out;
}

MeanStd metric_over_seeds(ExperimentConfig cfg, std::size_t seeds, double MetricsRow::*field) {
    std::vector<double> xs;
    for (std::size_t s = 0; s < seeds; ++s) {
        cfg.seed = s;
        const RunResult r = run_experiment(cfg);
        xs.push_back(metrics_row("", cfg.seed, r.state.accuracy).*field);
    }
    return mean_std(xs);
}

Outcome ablation_structure() {
    Outcome out;
    const ExperimentConfig base{};
    const AblationResult res = run_ablation(base, 5);
    const auto find = [&](const std::string& name) {
        for (const auto& s : res.summary)
            if (s.variant == name) return s;
        throw ProtocolError("missing variant " + name);
    };
    const VariantSummary ft = find("finetune"), oegr = find("oe_gr"), full = find("full");
    const double pooled = std::sqrt(0.5 * (ft.bwt.std * ft.bwt.std + oegr.bwt.std * oegr.bwt.std));
    out.require(oegr.bwt.mean - ft.bwt.mean > pooled, "BWT oe_gr " + fmt("%.4f", oegr.bwt.mean) + " vs finetune " +
                                                          fmt("%.4f", ft.bwt.mean) + " (pooled sd " + fmt("%.4f", pooled) + ")");
    out.require(full.acc.mean >= ft.acc.mean + 0.05,
                "ACC full " + fmt("%.4f", full.acc.mean) + " vs finetune " + fmt("%.4f", ft.acc.mean));
    return out;
}

Outcome single_pass() {
    Outcome out;
    ExperimentConfig cfg{};
    cfg.epochs = 1;
    const MeanStd oe = metric_over_seeds(cfg, 5, &MetricsRow::acc);
    cfg.baseline = Baseline::offline_svd_gpm;
    const MeanStd gpm = metric_over_seeds(cfg, 5, &MetricsRow::acc);
    out.require(oe.mean >= gpm.mean - 0.01, "ACC online " + fmt("%.4f", oe.mean) + " vs offline SVD " + fmt("%.4f", gpm.mean));
    return out;
}

Outcome determinism() {
    Outcome out;
    std::size_t identical = 0, runs = 0, leaked = 0;
    std::vector<ExperimentConfig> cfgs;
    for (const auto& v : ablation_variants()) cfgs.push_back(with_variant(ExperimentConfig{}, v));
    ExperimentConfig gpm{};
    gpm.baseline = Baseline::offline_svd_gpm;
    cfgs.push_back(gpm);
    ExperimentConfig adam{};
    adam.optimizer = OptimizerKind::adam;
    cfgs.push_back(adam);
    for (ExperimentConfig cfg : cfgs) {
        cfg.seed = 11;
        const RunResult a = run_experiment(cfg);
        const RunResult b = run_experiment(cfg);
        const auto texts = [](const RunResult& r) {
            const RunState& st = r.state;
            return accuracy_csv(st.accuracy) + violation_csv(st.log.violation) + violation_csv(st.log.violation_raw) +
                   angular_csv(st.log.angular) + histogram_csv(st.log.histogram) + checkpoint_text(st);
        };
        ++runs;
        identical += texts(a) == texts(b);
        leaked += a.completed_reads + b.completed_reads;
    }
    out.require(identical == runs, std::to_string(identical) + "/" + std::to_string(runs) + " runs bitwise identical");
    out.require(leaked == 0, std::to_string(leaked) + " training reads of completed-task samples");
    return out;
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

}  // namespace

// With an argument, runs only the criterion with that number.
int main(int argc, char** argv) {
    const int only = argc > 1 ? std::atoi(argv[1]) : 0;
    const std::vector<Criterion> criteria{
        {1, "safe-projection exactness", 5.0, safe_projection},
        {2, "rectification optimality", 5.0, rectification},
        {3, "violation structure", 60.0, violation_structure},
        {4, "online estimation", 30.0, online_estimation},
        {5, "gradient fidelity", 60.0, gradient_fidelity},
        {6, "margin-loss semantics", 60.0, dml_semantics},
        {7, "metric identities", 60.0, metric_identities},
        {8, "ablation structure", 600.0, ablation_structure},
        {9, "single-pass non-inferiority", 600.0, single_pass},
        {10, "determinism and exemplar-freedom", 600.0, determinism},
    };
    int failures = 0;
    std::size_t ran = 0;
    for (const auto& c : criteria) {
        if (only != 0 && c.id != only) continue;
        ++ran;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.require(secs < c.budget_s, "runtime " + fmt("%.2f", secs) + " s < " + fmt("%.0f", c.budget_s) + " s");
        failures += !o.pass;
        std::printf("%s criterion %2d %-34s %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
        std::fflush(stdout);
    }
    if (ran == 0) {
        std::fprintf(stderr, "no criterion numbered %d\n", only);
        return 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(ran) - failures, ran);
    return failures;
}

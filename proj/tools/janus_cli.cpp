// Command-line front end: run, ablate, diagnose, sweep, selftest.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "janus/harness/experiments.hpp"
#include "selftest.hpp"

namespace fs = std::filesystem;
using namespace janus;
using namespace janus::harness;

namespace {

constexpr const char* kOutRootEnv = "JANUS_OUT_ROOT";

struct CommonOptions {
    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string variant;
    std::string optimizer;
    std::string baseline;
};

fs::path output_dir(const CommonOptions& o, const std::string& fallback) {
    if (!o.out.empty()) return o.out;
    const char* root = std::getenv(kOutRootEnv);
    return fs::path(root && *root ? root : "janus_out") / fallback;
}

ExperimentConfig resolve_config(const CommonOptions& o) {
    ExperimentConfig cfg;
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) throw CLI::ValidationError("--config", "cannot open config file '" + o.config_path + "'");
        cfg = parse_config(in);
    }
    if (o.seed) cfg.seed = *o.seed;
    if (!o.variant.empty()) cfg.variant = find_variant(o.variant).flags;
    if (!o.optimizer.empty()) cfg.optimizer = parse_optimizer(o.optimizer);
    if (!o.baseline.empty()) cfg.baseline = parse_baseline(o.baseline);
    cfg.validate();
    return cfg;
}

std::string variant_label(const ExperimentConfig& cfg) {
    if (cfg.baseline != Baseline::janus) return baseline_name(cfg.baseline);
    for (const auto& v : ablation_variants())
        if (v.flags == cfg.variant) return v.name;
    return "custom";
}

void add_common(CLI::App* cmd, CommonOptions& o, bool with_variant) {
    cmd->add_option("--config", o.config_path, "Experiment config (key = value with [sections])");
    cmd->add_option("--out", o.out, std::string("Output directory (default: $") + kOutRootEnv + "/<command>)");
    cmd->add_option("--seed", o.seed, "Seed override");
    cmd->add_option("--optimizer", o.optimizer, "Optimizer override")->check(CLI::IsMember({"sgd", "adam"}));
    if (with_variant) {
        cmd->add_option("--variant", o.variant, "Ablation row by name or number 1..7");
        cmd->add_option("--baseline", o.baseline, "janus | finetune | offline-svd-gpm");
    }
}

int cmd_run(const CommonOptions& o) {
    const ExperimentConfig cfg = resolve_config(o);
    const fs::path dir = output_dir(o, "run");
    const RunResult r = run_experiment(cfg);
    write_run_reports(dir, variant_label(cfg), r);
    save_checkpoint(dir / "checkpoint.ckpt", r.state);
    const MetricsRow m = metrics_row(variant_label(cfg), cfg.seed, r.state.accuracy);
    std::printf("%s seed %llu: ACC %.4f MAA %.4f BWT %.4f (completed-task reads: %zu)\n", m.variant.c_str(),
                static_cast<unsigned long long>(cfg.seed), m.acc, m.maa, m.bwt, r.completed_reads);
    std::printf("wrote %s\n", dir.string().c_str());
    return 0;
}

int cmd_ablate(const CommonOptions& o, std::size_t seeds) {
    const ExperimentConfig cfg = resolve_config(o);
    const fs::path dir = output_dir(o, "ablate");
    fs::create_directories(dir);
    write_text(dir / "config.ini", config_to_text(cfg));
    const AblationResult res = run_ablation(cfg, seeds);
    write_text(dir / "metrics.csv", metrics_csv(res.rows));
    write_text(dir / "summary.csv", summary_csv(res.summary));
    for (const auto& s : res.summary) {
        std::printf("%-9s ACC %.4f +- %.4f  MAA %.4f +- %.4f  BWT %.4f +- %.4f\n", s.variant.c_str(), s.acc.mean, s.acc.std,
                    s.maa.mean, s.maa.std, s.bwt.mean, s.bwt.std);
    }
    std::printf("%zu metric rows written to %s\n", res.rows.size(), (dir / "metrics.csv").string().c_str());
    return 0;
}

int cmd_diagnose(const std::string& checkpoint, const CommonOptions& o) {
    const Checkpoint ck = load_checkpoint(checkpoint);
    const fs::path dir = output_dir(o, "diagnose");
    fs::create_directories(dir);
    const DiagnoseResult d = diagnose(ck);
    write_text(dir / "config.ini", config_to_text(ck.cfg));
    write_text(dir / "violation.csv", violation_csv(d.violation));
    write_text(dir / "violation_raw.csv", violation_csv(d.violation_raw));
    write_text(dir / "angular.csv", angular_csv(d.angular));
    write_text(dir / "angular_hist.csv", histogram_csv(d.histogram));
    std::ostringstream acc;
    acc << "task,accuracy\n";
    for (std::size_t i = 0; i < d.accuracy_row.size(); ++i) acc << i << "," << fmt10(d.accuracy_row[i]) << "\n";
    write_text(dir / "accuracy_row.csv", acc.str());
    std::printf("diagnosed %zu tasks; danger fraction %.4f; %zu violation rows; wrote %s\n", d.accuracy_row.size(),
                d.danger_fraction, d.violation.size(), dir.string().c_str());
    return 0;
}

std::vector<std::string> split_values(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

int cmd_sweep(const CommonOptions& o, std::size_t seeds, const std::string& param, const std::string& values) {
    const ExperimentConfig base = resolve_config(o);
    const fs::path dir = output_dir(o, "sweep");
    std::vector<std::string> grid = param.empty() ? std::vector<std::string>{""} : split_values(values);
    if (!param.empty() && grid.empty()) throw CLI::ValidationError("--values", "needs at least one value");
    struct Job {
        std::string value;
        ExperimentConfig cfg;
        fs::path dir;
        std::string row;
    };
    std::vector<Job> jobs;
    for (const std::string& value : grid) {
        ExperimentConfig cfg = base;
        if (!param.empty()) set_key(cfg, param, value);
        cfg.validate();
        for (std::size_t s = 0; s < seeds; ++s) {
            ExperimentConfig run = cfg;
            run.seed = cfg.seed + s;
            const std::string point = param.empty() ? std::string("base") : param + "=" + value;
            jobs.push_back({value, run, dir / point / ("seed" + std::to_string(run.seed)), {}});
        }
    }

    // Each job owns its state and output directory, so runs proceed in parallel.
    const std::size_t workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    for (std::size_t start = 0; start < jobs.size(); start += workers) {
        std::vector<std::future<void>> pending;
        for (std::size_t j = start; j < std::min(jobs.size(), start + workers); ++j) {
            pending.push_back(std::async(std::launch::async, [&job = jobs[j], &param] {
                const RunResult r = run_experiment(job.cfg);
                const std::string label = variant_label(job.cfg);
                write_run_reports(job.dir, label, r);
                const MetricsRow m = metrics_row(label, job.cfg.seed, r.state.accuracy);
                job.row = param + "," + job.value + "," + label + "," + std::to_string(job.cfg.seed) + "," + fmt10(m.acc) +
                          "," + fmt10(m.maa) + "," + fmt10(m.bwt) + "\n";
            }));
        }
        for (auto& f : pending) f.get();
    }
    std::ostringstream csv;
    csv << "param,value,variant,seed,ACC,MAA,BWT\n";
    for (const Job& job : jobs) csv << job.row;
    fs::create_directories(dir);
    write_text(dir / "sweep.csv", csv.str());
    std::printf("wrote %s\n", (dir / "sweep.csv").string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Low-rank continual-learning numerics harness"};
    app.require_subcommand(1);

    CommonOptions run_opts, ablate_opts, diag_opts, sweep_opts;
    std::size_t ablate_seeds = 5, sweep_seeds = 1;
    std::string checkpoint, sweep_param, sweep_values;

    auto* run = app.add_subcommand("run", "Train one experiment and write its reports and checkpoint");
    add_common(run, run_opts, true);

    auto* ablate = app.add_subcommand("ablate", "Run all seven ablation variants over several seeds");
    add_common(ablate, ablate_opts, false);
    ablate->add_option("--seeds", ablate_seeds, "Number of seeds per variant")->check(CLI::PositiveNumber);

    auto* diag = app.add_subcommand("diagnose", "Recompute diagnostics from a checkpoint");
    diag->add_option("--checkpoint", checkpoint, "Checkpoint written by `run`")->required();
    diag->add_option("--out", diag_opts.out, "Output directory");

    auto* sweep = app.add_subcommand("sweep", "Iterate seeds and optionally one config key");
    add_common(sweep, sweep_opts, true);
    sweep->add_option("--seeds", sweep_seeds, "Number of seeds per grid point")->check(CLI::PositiveNumber);
    sweep->add_option("--param", sweep_param, "Dotted config key to vary, e.g. oe.rank");
    sweep->add_option("--values", sweep_values, "Comma-separated values for --param");

    auto* self = app.add_subcommand("selftest", "Run the built-in oracle checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*run) return cmd_run(run_opts);
        if (*ablate) return cmd_ablate(ablate_opts, ablate_seeds);
        if (*diag) return cmd_diagnose(checkpoint, diag_opts);
        if (*sweep) return cmd_sweep(sweep_opts, sweep_seeds, sweep_param, sweep_values);
        if (*self) {
            const int failures = selftest::run(stdout);
            std::printf("%s\n", failures == 0 ? "selftest: all checks passed" : "selftest: FAILED");
            return failures == 0 ? 0 : 1;
        }
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

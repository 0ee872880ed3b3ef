#pragma once

// Experiment configuration: flat `key = value` text grouped in [sections].
// Unknown sections or keys are hard errors naming the offending key.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "janus/dml.hpp"
#include "janus/errors.hpp"
#include "janus/rectify.hpp"

namespace janus::harness {

enum class OptimizerKind { sgd, adam };
enum class Baseline { janus, finetune, offline_svd_gpm };

struct VariantFlags {
    bool use_oe = true;
    bool use_gr = true;
    bool use_dml = true;
    bool operator==(const VariantFlags&) const = default;
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::size_t tasks = 5;
    std::size_t classes_per_task = 2;
    std::size_t dim = 32;
    std::size_t samples_per_class = 200;
    double separation = 3.0;
    double shared = 4.0;
    double noise = 0.3;
    std::size_t epochs = 5;
    std::size_t batch_size = 32;

    std::size_t depth = 2;
    std::size_t width = 32;
    bool task_local_loss = false;

    OptimizerKind optimizer = OptimizerKind::sgd;
    double eta = 0.0;  // 0 selects the optimizer's default
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;

    std::size_t lora_rank = 4;
    double lora_scale = 1.0;

    RectifyConfig rectify;

    std::size_t oe_rank = 8;
    double oe_eta = 1e-3;

    DmlConfig dml;
    double momentum = 0.9;

    VariantFlags variant;
    Baseline baseline = Baseline::janus;

    std::size_t log_every = 10;
    std::size_t ref_samples = 64;

    double resolved_eta() const {
        if (eta > 0.0) return eta;
        return optimizer == OptimizerKind::sgd ? 0.1 : 1e-3;
    }

    /// Flags actually in force once the baseline tag is applied.
    VariantFlags effective_flags() const {
        if (baseline == Baseline::finetune) return {false, false, false};
        return variant;
    }

    void validate() const;
    bool operator==(const ExperimentConfig&) const = default;
};

inline const char* optimizer_name(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "adam"; }

inline const char* baseline_name(Baseline b) {
    switch (b) {
        case Baseline::janus: return "janus";
        case Baseline::finetune: return "finetune";
        case Baseline::offline_svd_gpm: return "offline-svd-gpm";
    }
    return "?";
}

inline OptimizerKind parse_optimizer(const std::string& s) {
    if (s == "sgd") return OptimizerKind::sgd;
    if (s == "adam") return OptimizerKind::adam;
    throw ConfigError("optimizer.name: unknown optimizer '" + s + "' (expected sgd or adam)");
}

inline Baseline parse_baseline(const std::string& s) {
    if (s == "janus") return Baseline::janus;
    if (s == "finetune") return Baseline::finetune;
    if (s == "offline-svd-gpm") return Baseline::offline_svd_gpm;
    throw ConfigError("variant.baseline: unknown baseline '" + s + "'");
}

inline void ExperimentConfig::validate() const {
    auto positive = [](bool ok, const char* key) {
        if (!ok) throw ConfigError(std::string(key) + " must be positive");
    };
    positive(tasks > 0, "experiment.tasks");
    positive(classes_per_task > 0, "experiment.classes_per_task");
    positive(dim > 0, "experiment.dim");
    positive(samples_per_class >= 5, "experiment.samples_per_class (>= 5)");
    positive(separation >= 0.0, "experiment.separation");
    positive(shared >= 0.0, "experiment.shared");
    positive(noise >= 0.0, "experiment.noise");
    positive(epochs > 0, "experiment.epochs");
    positive(batch_size > 0, "experiment.batch_size");
    positive(width > 0, "model.width");
    positive(eta >= 0.0, "optimizer.eta");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("optimizer.beta1 must be in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("optimizer.beta2 must be in [0, 1)");
    positive(adam_eps > 0.0, "optimizer.eps");
    positive(lora_rank > 0, "lora.rank");
    if (depth > 0 && lora_rank > std::min(dim, width)) throw ConfigError("lora.rank exceeds the smallest layer width");
    positive(lora_scale > 0.0, "lora.scale");
    rectify.validate();
    if (depth > 0 && oe_rank > std::min(dim, width)) throw ConfigError("oe.rank exceeds layer input width");
    positive(oe_eta > 0.0, "oe.eta_v");
    dml.validate();
    if (!(momentum >= 0.0 && momentum <= 1.0)) throw ConfigError("dml.momentum must be in [0, 1]");
    positive(log_every > 0, "diagnostics.log_every");
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

/// Shortest text that parses back to the same double.
inline std::string format_real(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct Field {
    std::function<void(const std::string&)> set;
    std::function<std::string()> get;
};

inline std::size_t parse_count(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    unsigned long long out = 0;
    try {
        if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
        out = std::stoull(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != v.size()) throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
    return static_cast<std::size_t>(out);
}

inline double parse_real(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

/// Ordered table of every key; the echo writes them in this order.
inline std::vector<std::pair<std::string, Field>> fields(ExperimentConfig& c) {
    std::vector<std::pair<std::string, Field>> out;
    auto count = [&](std::string key, std::size_t& ref) {
        out.push_back({key, {[key, &ref](const std::string& v) { ref = parse_count(key, v); },
                             [&ref] { return std::to_string(ref); }}});
    };
    auto real = [&](std::string key, double& ref) {
        out.push_back({key, {[key, &ref](const std::string& v) { ref = parse_real(key, v); },
                             [&ref] { return format_real(ref); }}});
    };
    auto flag = [&](std::string key, bool& ref) {
        out.push_back({key, {[key, &ref](const std::string& v) { ref = parse_bool(key, v); },
                             [&ref] { return std::string(ref ? "true" : "false"); }}});
    };
    out.push_back({"experiment.seed", {[&c](const std::string& v) { c.seed = parse_count("experiment.seed", v); },
                                       [&c] { return std::to_string(c.seed); }}});
    count("experiment.tasks", c.tasks);
    count("experiment.classes_per_task", c.classes_per_task);
    count("experiment.dim", c.dim);
    count("experiment.samples_per_class", c.samples_per_class);
    real("experiment.separation", c.separation);
    real("experiment.shared", c.shared);
    real("experiment.noise", c.noise);
    count("experiment.epochs", c.epochs);
    count("experiment.batch_size", c.batch_size);
    count("model.depth", c.depth);
    count("model.width", c.width);
    flag("model.task_local_loss", c.task_local_loss);
    out.push_back({"optimizer.name", {[&c](const std::string& v) { c.optimizer = parse_optimizer(v); },
                                      [&c] { return std::string(optimizer_name(c.optimizer)); }}});
    out.push_back({"optimizer.eta", {[&c](const std::string& v) { c.eta = parse_real("optimizer.eta", v); },
                                     [&c] { return format_real(c.resolved_eta()); }}});
    real("optimizer.beta1", c.beta1);
    real("optimizer.beta2", c.beta2);
    real("optimizer.eps", c.adam_eps);
    count("lora.rank", c.lora_rank);
    real("lora.scale", c.lora_scale);
    real("rectify.delta", c.rectify.delta);
    count("oe.rank", c.oe_rank);
    real("oe.eta_v", c.oe_eta);
    real("dml.margin", c.dml.margin);
    real("dml.tau", c.dml.tau);
    real("dml.lambda", c.dml.lambda);
    real("dml.momentum", c.momentum);
    flag("variant.use_oe", c.variant.use_oe);
    flag("variant.use_gr", c.variant.use_gr);
    flag("variant.use_dml", c.variant.use_dml);
    out.push_back({"variant.baseline", {[&c](const std::string& v) { c.baseline = parse_baseline(v); },
                                        [&c] { return std::string(baseline_name(c.baseline)); }}});
    count("diagnostics.log_every", c.log_every);
    count("diagnostics.ref_samples", c.ref_samples);
    return out;
}

}  // namespace detail

/// Sets one dotted key ("section.key") from its textual value.
inline void set_key(ExperimentConfig& cfg, const std::string& dotted, const std::string& value) {
    for (auto& [key, field] : detail::fields(cfg)) {
        if (key == dotted) {
            field.set(value);
            return;
        }
    }
    throw ConfigError("unknown config key '" + dotted + "'");
}

inline std::string get_key(const ExperimentConfig& cfg, const std::string& dotted) {
    ExperimentConfig copy = cfg;
    for (auto& [key, field] : detail::fields(copy))
        if (key == dotted) return field.get();
    throw ConfigError("unknown config key '" + dotted + "'");
}

/// Starts from the defaults and applies every assignment in the text.
inline ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::string section;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        const std::string dotted = section.empty() ? key : section + "." + key;
        set_key(cfg, dotted, value);
    }
    cfg.validate();
    return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

/// Every key with its resolved value, grouped by section.
inline std::string config_to_text(const ExperimentConfig& cfg) {
    ExperimentConfig copy = cfg;
    std::ostringstream out;
    std::string section;
    for (auto& [key, field] : detail::fields(copy)) {
        const auto dot = key.find('.');
        const std::string sec = key.substr(0, dot);
        if (sec != section) {
            if (!section.empty()) out << "\n";
            out << "[" << sec << "]\n";
            section = sec;
        }
        out << key.substr(dot + 1) << " = " << field.get() << "\n";
    }
    return out.str();
}

struct VariantSpec {
    const char* name;
    VariantFlags flags;
};

/// Ablation rows 1 to 7: none, DML, OE, GR, OE+GR, OE+DML, all three.
inline const std::vector<VariantSpec>& ablation_variants() {
    static const std::vector<VariantSpec> table{
        {"finetune", {false, false, false}}, {"dml", {false, false, true}},   {"oe", {true, false, false}},
        {"gr", {false, true, false}},        {"oe_gr", {true, true, false}},  {"oe_dml", {true, false, true}},
        {"full", {true, true, true}},
    };
    return table;
}

/// Accepts a variant name or its row number 1..7.
inline VariantSpec find_variant(const std::string& name) {
    const auto& table = ablation_variants();
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (name == table[i].name || name == std::to_string(i + 1)) return table[i];
    }
    throw ConfigError("unknown variant '" + name + "'");
}

}  // namespace janus::harness

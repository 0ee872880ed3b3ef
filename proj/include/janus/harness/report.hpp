#pragma once

// CSV reports and the versioned text checkpoint.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "janus/harness/trainer.hpp"

namespace janus::harness {

inline std::string fmt10(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Row t lists A[t][0..t]; cells beyond the diagonal stay empty.
inline std::string accuracy_csv(const AccuracyMatrix& a) {
    std::ostringstream out;
    out << "t";
    for (std::size_t i = 0; i < a.tasks(); ++i) out << ",task" << i;
    out << "\n";
    for (std::size_t t = 0; t < a.tasks(); ++t) {
        out << t;
        for (std::size_t i = 0; i < a.tasks(); ++i) out << "," << (i <= t ? fmt10(a(t, i)) : "");
        out << "\n";
    }
    return out.str();
}

struct MetricsRow {
    std::string variant;
    std::uint64_t seed = 0;
    double acc = 0.0;
    double maa = 0.0;
    double bwt = 0.0;
};

inline MetricsRow metrics_row(const std::string& variant, std::uint64_t seed, const AccuracyMatrix& a) {
    return {variant, seed, acc_final(a), maa(a), a.tasks() >= 2 ? bwt(a) : 0.0};
}

inline std::string metrics_csv(const std::vector<MetricsRow>& rows) {
    std::ostringstream out;
    out << "variant,seed,ACC,MAA,BWT\n";
    for (const auto& r : rows) out << r.variant << "," << r.seed << "," << fmt10(r.acc) << "," << fmt10(r.maa) << "," << fmt10(r.bwt) << "\n";
    return out.str();
}

inline std::string violation_csv(const std::vector<ViolationRow>& rows) {
    std::ostringstream out;
    out << "step,layer,naive,safe,rectified\n";
    for (const auto& r : rows) {
        out << r.step << "," << r.layer << "," << fmt10(r.value.naive) << "," << fmt10(r.value.safe) << ","
            << fmt10(r.value.rectified) << "\n";
    }
    return out.str();
}

inline std::string angular_csv(const std::vector<AngularRow>& rows) {
    std::ostringstream out;
    out << "sample,cos_old_max,cos_own,in_danger\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i].record;
        out << i << "," << fmt10(r.cos_old_max) << "," << fmt10(r.cos_own) << "," << (r.in_danger ? 1 : 0) << "\n";
    }
    return out.str();
}

inline std::string histogram_csv(const std::array<std::size_t, kHistogramBins>& hist) {
    std::ostringstream out;
    out << "bin_lo,bin_hi,count\n";
    for (std::size_t b = 0; b < kHistogramBins; ++b) {
        const double lo = -1.0 + 2.0 * static_cast<double>(b) / kHistogramBins;
        const double hi = -1.0 + 2.0 * static_cast<double>(b + 1) / kHistogramBins;
        out << fmt10(lo) << "," << fmt10(hi) << "," << hist[b] << "\n";
    }
    return out.str();
}

/// Writes every per-run report plus the resolved config echo.
inline void write_run_reports(const std::filesystem::path& dir, const std::string& variant, const RunResult& result) {
    std::filesystem::create_directories(dir);
    const RunState& st = result.state;
    write_text(dir / "config.ini", config_to_text(st.cfg));
    write_text(dir / "accuracy.csv", accuracy_csv(st.accuracy));
    write_text(dir / "metrics.csv", metrics_csv({metrics_row(variant, st.cfg.seed, st.accuracy)}));
    write_text(dir / "violation.csv", violation_csv(st.log.violation));
    write_text(dir / "violation_raw.csv", violation_csv(st.log.violation_raw));
    write_text(dir / "angular.csv", angular_csv(st.log.angular));
    write_text(dir / "angular_hist.csv", histogram_csv(st.log.histogram));
}

// ---------------------------------------------------------------------------
// Checkpoint: "JANUS-CKPT 1" header, then tagged records. Reals are written
// as hexfloats so a reload is exact.

inline constexpr const char* kCheckpointMagic = "JANUS-CKPT";
inline constexpr int kCheckpointVersion = 1;

namespace detail {

inline std::string hex(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

inline void put_matrix(std::ostream& out, const std::string& tag, const Matrix& m) {
    out << tag << " " << m.rows() << " " << m.cols();
    for (double v : m.values()) out << " " << hex(v);
    out << "\n";
}

class Reader {
public:
    explicit Reader(const std::string& text) : in_(text) {}

    std::string word() {
        std::string w;
        if (!(in_ >> w)) throw ProtocolError("checkpoint: unexpected end of data");
        return w;
    }

    void expect(const std::string& tag) {
        const std::string w = word();
        if (w != tag) throw ProtocolError("checkpoint: expected '" + tag + "', found '" + w + "'");
    }

    std::size_t count() {
        const std::string w = word();
        try {
            return static_cast<std::size_t>(std::stoull(w));
        } catch (const std::exception&) {
            throw ProtocolError("checkpoint: bad count '" + w + "'");
        }
    }

    double real() {
        const std::string w = word();
        char* end = nullptr;
        const double v = std::strtod(w.c_str(), &end);
        if (end == w.c_str() || *end != '\0') throw ProtocolError("checkpoint: bad number '" + w + "'");
        return v;
    }

    Matrix matrix(const std::string& tag) {
        expect(tag);
        const std::size_t r = count();
        const std::size_t c = count();
        std::vector<double> data(r * c);
        for (double& v : data) v = real();
        return Matrix(r, c, std::move(data));
    }

    std::string line() {
        std::string l;
        std::getline(in_, l);
        return l;
    }

private:
    std::istringstream in_;
};

}  // namespace detail

struct Checkpoint {
    ExperimentConfig cfg;
    ToyNet net{std::vector<AdaptedLayer>{}, Matrix()};
    PrototypeBank bank{1};
    std::vector<Matrix> estimator_v;
    std::vector<std::vector<Matrix>> protection_history;
    std::size_t tasks_done = 0;
    std::size_t step = 0;
    AccuracyMatrix accuracy;
};

inline std::string checkpoint_text(const RunState& st) {
    std::ostringstream out;
    out << kCheckpointMagic << " " << kCheckpointVersion << "\n";
    const std::string cfg = config_to_text(st.cfg);
    std::size_t lines = 0;
    for (char c : cfg) lines += c == '\n';
    out << "config " << lines << "\n" << cfg;
    out << "tasks_done " << st.tasks_done << "\nstep " << st.step << "\n";
    out << "layers " << st.net.depth() << "\n";
    for (const auto& l : st.net.layers()) {
        out << "layer " << activation_name(l.act) << " " << detail::hex(l.adapter.scale()) << "\n";
        detail::put_matrix(out, "base", l.adapter.base());
        detail::put_matrix(out, "a", l.adapter.a());
        detail::put_matrix(out, "b", l.adapter.b());
    }
    detail::put_matrix(out, "head", st.net.head());
    out << "prototypes " << st.bank.dim() << " " << detail::hex(st.bank.momentum()) << " " << st.bank.past().size() << " "
        << st.bank.live().size() << "\n";
    for (const auto* set : {&st.bank.past(), &st.bank.live()}) {
        for (const auto& [cls, p] : *set) {
            out << "proto " << cls;
            for (double v : p) out << " " << detail::hex(v);
            out << "\n";
        }
    }
    out << "estimators " << st.estimators.size() << "\n";
    for (const auto& e : st.estimators) detail::put_matrix(out, "v", e.v());
    out << "boundaries " << st.protection_history.size() << "\n";
    for (const auto& per_layer : st.protection_history)
        for (const auto& v : per_layer) detail::put_matrix(out, "basis", v);
    out << "accuracy " << st.accuracy.tasks() << "\n";
    for (const auto& row : st.accuracy.rows()) {
        out << "row";
        for (double v : row) out << " " << detail::hex(v);
        out << "\n";
    }
    out << "end\n";
    return out.str();
}

inline Checkpoint parse_checkpoint(const std::string& text) {
    detail::Reader rd(text);
    rd.expect(kCheckpointMagic);
    const std::size_t version = rd.count();
    if (version != static_cast<std::size_t>(kCheckpointVersion)) {
        throw ProtocolError("checkpoint: unsupported version " + std::to_string(version));
    }
    Checkpoint ck;
    rd.expect("config");
    const std::size_t lines = rd.count();
    rd.line();
    std::string cfg;
    for (std::size_t i = 0; i < lines; ++i) cfg += rd.line() + "\n";
    ck.cfg = parse_config_text(cfg);
    rd.expect("tasks_done");
    ck.tasks_done = rd.count();
    rd.expect("step");
    ck.step = rd.count();
    rd.expect("layers");
    const std::size_t depth = rd.count();
    std::vector<AdaptedLayer> layers;
    for (std::size_t l = 0; l < depth; ++l) {
        rd.expect("layer");
        const std::string act = rd.word();
        if (act != "tanh" && act != "identity") throw ProtocolError("checkpoint: unknown activation '" + act + "'");
        const double scale = rd.real();
        Matrix base = rd.matrix("base");
        Matrix a = rd.matrix("a");
        Matrix b = rd.matrix("b");
        layers.push_back({LoraAdapter(std::move(base), std::move(a), std::move(b), scale),
                          act == "tanh" ? Activation::tanh : Activation::identity});
    }
    Matrix head = rd.matrix("head");
    ck.net = ToyNet(std::move(layers), std::move(head));
    rd.expect("prototypes");
    const std::size_t dim = rd.count();
    const double momentum = rd.real();
    const std::size_t n_past = rd.count();
    const std::size_t n_live = rd.count();
    ck.bank = PrototypeBank(dim, momentum);
    for (std::size_t i = 0; i < n_past + n_live; ++i) {
        rd.expect("proto");
        const auto cls = static_cast<ClassId>(std::stol(rd.word()));
        Prototype p(dim);
        for (double& v : p) v = rd.real();
        if (i < n_past) ck.bank.set_past(cls, std::move(p));
        else ck.bank.set_live(cls, std::move(p));
    }
    rd.expect("estimators");
    const std::size_t n_est = rd.count();
    for (std::size_t i = 0; i < n_est; ++i) ck.estimator_v.push_back(rd.matrix("v"));
    rd.expect("boundaries");
    const std::size_t n_bound = rd.count();
    for (std::size_t t = 0; t < n_bound; ++t) {
        std::vector<Matrix> per_layer;
        for (std::size_t l = 0; l < depth; ++l) per_layer.push_back(rd.matrix("basis"));
        ck.protection_history.push_back(std::move(per_layer));
    }
    rd.expect("accuracy");
    const std::size_t n_rows = rd.count();
    for (std::size_t t = 0; t < n_rows; ++t) {
        rd.expect("row");
        std::vector<double> row(t + 1);
        for (double& v : row) v = rd.real();
        ck.accuracy.append_row(std::move(row));
    }
    rd.expect("end");
    return ck;
}

inline void save_checkpoint(const std::filesystem::path& path, const RunState& st) { write_text(path, checkpoint_text(st)); }

inline Checkpoint load_checkpoint(const std::filesystem::path& path) { return parse_checkpoint(read_text(path)); }

}  // namespace janus::harness

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "tetris/acceptance.hpp"
#include "tetris/io.hpp"
#include "tetris/log.hpp"
#include "tetris/pipeline.hpp"
#include "tetris/signal_model.hpp"
#include "tetris/tetris.hpp"
#include "tetris/tf.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace tetris;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Common {
    std::string config;
    std::string input;
    std::optional<double> fs;
    std::string out;
};

io::RunConfig load_config(const Common& c) {
    io::RunConfig cfg = c.config.empty() ? io::RunConfig{} : io::load_run_config(c.config);
    if (!c.input.empty()) cfg.input = c.input;
    if (c.fs) cfg.fs = c.fs;
    if (!c.out.empty()) cfg.output = c.out;
    return cfg;
}

fs::path output_dir(const io::RunConfig& cfg, const std::string& fallback) {
    return cfg.output.empty() ? io::default_output_root() / fallback : cfg.output;
}

RealSignal load_input(const io::RunConfig& cfg) {
    if (cfg.input.empty()) throw InvalidArgument("no input file given");
    return io::read_signal_csv(cfg.input, cfg.fs);
}

/// Collects written files and publishes manifest.json last.
class Run {
public:
    Run(std::string command, fs::path dir) : dir_(std::move(dir)) {
        fs::create_directories(dir_);
        manifest_["command"] = std::move(command);
        manifest_["version"] = kVersion;
    }

    fs::path file(const std::string& name) {
        files_.push_back(name);
        return dir_ / name;
    }

    json& manifest() { return manifest_; }

    void finish() {
        json files = json::array();
        for (const auto& f : files_) files.push_back({{"name", f}, {"bytes", fs::file_size(dir_ / f)}});
        manifest_["files"] = files;
        manifest_["status"] = "complete";
        io::write_file_atomic(dir_ / "manifest.json", manifest_.dump(2) + "\n");
    }

    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    std::vector<std::string> files_;
    json manifest_;
};

void write_tfr_outputs(Run& run, const std::string& stem, const Tfr& tfr, io::TfrPayload payload, bool heatmap) {
    io::write_tfr(run.file(stem + ".tfr"), tfr, payload);
    if (heatmap) {
        io::write_pgm(run.file(stem + ".pgm"), tfr.magnitude());
        run.file(stem + ".pgm.json");
    }
}

std::vector<double> seed_from_cycles(const RealSignal& sig, const PipelineConfig& pc) {
    const auto peaks = detect_cycles(sig, {pc.peak_window, pc.peak_std_factor, pc.min_peak_separation});
    return ihr_from_cycles(peaks, sample_times(sig.size(), sig.fs(), sig.t0()));
}

int cmd_synth(const Common& c, const std::string& preset_flag, const std::string& spec_flag,
              std::optional<std::uint64_t> seed, std::optional<double> duration, std::optional<double> noise_scale,
              std::optional<double> fm_depth, bool no_noise) {
    auto cfg = load_config(c);
    if (!preset_flag.empty()) cfg.preset = preset_flag;
    if (!spec_flag.empty()) cfg.spec = spec_flag;
    if (seed) cfg.seed = *seed;
    if (duration) cfg.duration = *duration;
    if (noise_scale) cfg.noise_scale = *noise_scale;
    if (fm_depth) cfg.fm_depth = *fm_depth;
    cfg.validate();
    if (cfg.preset.empty() == cfg.spec.empty()) throw InvalidArgument("synth: give exactly one of --preset or --spec");

    Preset preset;
    if (!cfg.preset.empty()) {
        PresetOptions po;
        po.duration = cfg.duration;
        po.fs = cfg.fs.value_or(50.0);
        po.seed = cfg.seed;
        po.noise_scale = cfg.noise_scale;
        po.fm_depth = cfg.fm_depth;
        preset = make_preset(cfg.preset, po);
    } else {
        preset.name = cfg.spec.stem().string();
        preset.spec = io::load_spec_ini(cfg.spec);
    }
    preset.spec.validate();
    if (no_noise) preset.noise.clear();

    const auto& spec = preset.spec;
    const std::size_t n = spec.size();
    const auto clean = synthesize_ganhm(spec, n);
    const auto noisy = render_preset(preset);

    Run run("synth", output_dir(cfg, "synth-" + preset.name));
    io::write_signal_csv(run.file("signal.csv"), noisy);
    io::write_signal_csv(run.file("clean.csv"), clean);
    io::Table truth;
    truth.add("t", sample_times(n, spec.fs(), spec.t0()));
    truth.add("phi", spec.phi.phase);
    truth.add("phi_rate", spec.phi.derivative);
    truth.add("cardiac_phase", spec.cardiac_phase());
    truth.add("cardiac_rate", spec.cardiac_rate());
    truth.add("resp_phase", spec.phi0.phase);
    truth.add("resp_rate", spec.phi0.derivative);
    truth.add("riiv", spec.riiv());
    for (int l = 1; l <= spec.d1; ++l) truth.add("riav_" + std::to_string(l), spec.riav(l));
    for (int l = 1; l <= spec.d1; ++l) truth.add("am_" + std::to_string(l), spec.harmonic_am(l));
    truth.add("fm_depth", spec.fm_depth);
    io::write_table_csv(run.file("truth.csv"), truth);
    io::write_spec_ini(run.file("spec.ini"), spec);

    auto& m = run.manifest();
    m["preset"] = preset.name;
    m["seed"] = cfg.seed;
    m["fs"] = spec.fs();
    m["samples"] = n;
    m["fm_depth"] = spec.fm_bound();
    json noise = json::array();
    for (const auto& z : preset.noise) {
        noise.push_back({{"center_time", z.center_time}, {"time_spread", z.time_spread}, {"center_freq", z.center_freq},
                         {"bandwidth", z.bandwidth}, {"amplitude", z.amplitude}, {"seed", z.seed}});
    }
    m["noise"] = noise;
    run.finish();
    std::cout << "wrote " << run.dir().string() << "\n";
    return 0;
}

int cmd_tfr(const Common& c, const std::string& kind, double window, std::optional<std::size_t> hop,
            const std::string& csv, bool magnitude, bool heatmap) {
    auto cfg = load_config(c);
    cfg.validate();
    if (kind != "stft" && kind != "sst") throw InvalidArgument("tfr: --kind must be stft or sst");
    const auto sig = load_input(cfg);
    const auto& tc = cfg.pipeline.tetris;
    const auto axis = tc.axis(sig.fs());
    const auto w = gaussian_window(window, sig.fs());
    const std::size_t h = hop.value_or(tc.hop);
    Tfr tfr;
    if (kind == "stft") {
        tfr = stft(sig, w, axis, h);
    } else {
        SstOptions so;
        so.hop = h;
        so.gamma_rel = tc.gamma_rel;
        tfr = sst(sig, w, axis, so);
    }
    Run run("tfr", output_dir(cfg, "tfr"));
    write_tfr_outputs(run, kind, tfr, magnitude ? io::TfrPayload::magnitude : io::TfrPayload::complex, heatmap);
    if (!csv.empty()) io::write_tfr_csv(run.file(csv), tfr);
    auto& m = run.manifest();
    m["kind"] = kind;
    m["window_L"] = window;
    m["hop"] = h;
    m["n_freq"] = axis.n;
    m["n_time"] = tfr.time.n;
    m["config"] = io::dump_run_config(cfg);
    run.finish();
    std::cout << "wrote " << run.dir().string() << "\n";
    return 0;
}

int cmd_tetris(const Common& c, std::optional<int> Q, bool do_preprocess, std::optional<double> ihr,
               bool intermediates, bool heatmap) {
    auto cfg = load_config(c);
    if (Q) {
        cfg.pipeline.tetris.Q = *Q;
        cfg.pipeline.tetris.weights.clear();
    }
    if (intermediates) cfg.export_intermediates = true;
    cfg.validate();
    auto sig = load_input(cfg);
    if (do_preprocess) sig = preprocess(sig, cfg.pipeline);
    const auto seed = ihr ? std::vector<double>(sig.size(), *ihr) : seed_from_cycles(sig, cfg.pipeline);
    const auto out = build_tetris(sig, seed, cfg.pipeline.tetris);

    Run run("tetris", output_dir(cfg, "tetris"));
    write_tfr_outputs(run, "T_long", io::magnitude_tfr(out.T_long, out.long_tfrs.front(), TfrKind::ensemble),
                      io::TfrPayload::magnitude, heatmap);
    write_tfr_outputs(run, "T_short", io::magnitude_tfr(out.T_short, out.short_tfrs.front(), TfrKind::ensemble),
                      io::TfrPayload::magnitude, heatmap);
    io::Table phases;
    phases.add("t", sample_times(sig.size(), sig.fs(), sig.t0()));
    for (std::size_t k = 0; k < out.phases.size(); ++k) phases.add("psi_" + std::to_string(k), out.phases[k].phase);
    io::write_table_csv(run.file("phases.csv"), phases);
    if (cfg.export_intermediates) {
        for (std::size_t k = 0; k < out.long_tfrs.size(); ++k) {
            write_tfr_outputs(run, "S_long_" + std::to_string(k), out.long_tfrs[k], io::TfrPayload::complex, heatmap);
            write_tfr_outputs(run, "S_short_" + std::to_string(k), out.short_tfrs[k], io::TfrPayload::complex, heatmap);
        }
    }
    auto& m = run.manifest();
    m["effective_Q"] = out.effective_Q;
    m["truncated"] = out.truncated;
    json conf = json::array();
    for (const auto& r : out.ihr_ridges) conf.push_back(r.confidence);
    m["ridge_confidence"] = conf;
    m["config"] = io::dump_run_config(cfg);
    run.finish();
    std::cout << "wrote " << run.dir().string() << " (effective Q = " << out.effective_Q << ")\n";
    return 0;
}

int cmd_extract(const Common& c, bool intermediates, bool heatmap) {
    auto cfg = load_config(c);
    if (intermediates) cfg.export_intermediates = true;
    cfg.validate();
    const auto raw = load_input(cfg);
    const auto res = extract_respiration(raw, cfg.pipeline);
    const auto& pre = res.preprocessed;

    Run run("extract", output_dir(cfg, "extract"));
    io::Table t;
    t.add("t", sample_times(pre.size(), pre.fs(), pre.t0()));
    t.add("preprocessed", pre.vec());
    t.add("ihr_seed", res.ihr_seed);
    t.add("ihr", res.ihr);
    t.add("irr", res.irr);
    t.add("triiv", res.triiv.vec());
    t.add("triav", res.triav.vec());
    for (const auto& h : res.harmonics) t.add("R_" + std::to_string(h.l), h.surrogate.vec());
    io::write_table_csv(run.file("outputs.csv"), t);
    for (std::size_t c = 1; c < t.names.size(); ++c) {
        io::Table one;
        one.add("t", t.columns[0]);
        one.add("value", t.columns[c]);
        io::write_table_csv(run.file(t.names[c] + ".csv"), one);
    }

    io::Table coeffs;
    std::vector<double> cl, cd, cj, cc, cs;
    for (const auto& h : res.harmonics) {
        for (const auto& q : h.samd.coeffs) {
            cl.push_back(h.l);
            cd.push_back(q.l);
            cj.push_back(q.j);
            cc.push_back(q.cos_coeff);
            cs.push_back(q.sin_coeff);
        }
    }
    coeffs.add("l", cl);  // cardiac harmonic
    coeffs.add("d", cd);  // respiratory harmonic inside the SAMD dictionary
    coeffs.add("j", cj);
    coeffs.add("cos", cc);
    coeffs.add("sin", cs);
    io::write_table_csv(run.file("samd_coefficients.csv"), coeffs);

    io::Table hm;
    hm.add("t", sample_times(pre.size(), pre.fs(), pre.t0()));
    for (const auto& h : res.harmonics) {
        hm.add("am_" + std::to_string(h.l), h.am);
        hm.add("phase_" + std::to_string(h.l), h.phase);
    }
    io::write_table_csv(run.file("harmonics.csv"), hm);

    io::Table ridges;
    ridges.add("t", res.tetris.time.values());
    ridges.add("irr", res.irr_ridge.freqs);
    for (std::size_t k = 0; k < res.tetris.ihr_ridges.size(); ++k) {
        ridges.add("ihr_" + std::to_string(k), res.tetris.ihr_ridges[k].freqs);
    }
    io::write_table_csv(run.file("ridges.csv"), ridges);
    io::Table peaks;
    peaks.add("t", res.peaks);
    io::write_table_csv(run.file("peaks.csv"), peaks);

    const auto& tet = res.tetris;
    write_tfr_outputs(run, "T_long", io::magnitude_tfr(tet.T_long, tet.long_tfrs.front(), TfrKind::ensemble),
                      io::TfrPayload::magnitude, heatmap);
    if (cfg.export_intermediates) {
        write_tfr_outputs(run, "T_short", io::magnitude_tfr(tet.T_short, tet.short_tfrs.front(), TfrKind::ensemble),
                          io::TfrPayload::magnitude, heatmap);
        for (std::size_t k = 0; k < tet.long_tfrs.size(); ++k) {
            write_tfr_outputs(run, "S_long_" + std::to_string(k), tet.long_tfrs[k], io::TfrPayload::complex, heatmap);
        }
    }

    auto& m = run.manifest();
    m["low_confidence"] = res.low_confidence;
    m["notes"] = res.notes;
    m["effective_Q"] = tet.effective_Q;
    m["irr_confidence"] = res.irr_ridge.confidence;
    m["irr_strength"] = res.irr_strength;
    json samd = json::array();
    for (const auto& h : res.harmonics) samd.push_back({{"l", h.l}, {"condition", h.samd.condition}});
    m["samd"] = samd;
    m["config"] = io::dump_run_config(cfg);
    run.finish();
    std::cout << "wrote " << run.dir().string() << (res.low_confidence ? " (low confidence)" : "") << "\n";
    return 0;
}

int cmd_baseline(const Common& c, bool do_preprocess) {
    auto cfg = load_config(c);
    cfg.validate();
    auto sig = load_input(cfg);
    if (do_preprocess) sig = preprocess(sig, cfg.pipeline);
    const auto riiv = traditional_riiv(sig, cfg.pipeline);
    const auto riav = traditional_riav(sig, cfg.pipeline);
    Run run("baseline", output_dir(cfg, "baseline"));
    io::Table t;
    t.add("t", sample_times(sig.size(), sig.fs(), sig.t0()));
    t.add("triiv", riiv.vec());
    t.add("triav", riav.vec());
    io::write_table_csv(run.file("baseline.csv"), t);
    run.manifest()["config"] = io::dump_run_config(cfg);
    run.finish();
    std::cout << "wrote " << run.dir().string() << "\n";
    return 0;
}

int verify_decorrelation(const Common& c, std::optional<std::uint64_t> seed, std::optional<int> realizations,
                         std::optional<double> f0) {
    auto cfg = load_config(c);
    DecorrelationOptions opts;
    opts.seed = seed.value_or(cfg.seed);
    if (realizations) opts.n_realizations = *realizations;
    if (f0) opts.f0 = *f0;
    const auto rep = verify_noise_decorrelation(opts);
    std::printf("%8s %8s %12s %12s %12s %s\n", "t", "xi", "|cov|", "|pcov|", "bound", "result");
    io::Table t;
    std::vector<double> ts, xs, cv, pc, bd, ok;
    for (const auto& p : rep.points) {
        std::printf("%8.2f %8.2f %12.4g %12.4g %12.4g %s\n", p.t, p.xi, p.cov, p.pcov, p.bound, p.pass ? "pass" : "FAIL");
        ts.push_back(p.t);
        xs.push_back(p.xi);
        cv.push_back(p.cov);
        pc.push_back(p.pcov);
        bd.push_back(p.bound);
        ok.push_back(p.pass ? 1.0 : 0.0);
    }
    std::printf("support half-width %.4g Hz, f0 %.4g Hz, variance mismatch %.3g (%s)\n", rep.support_halfwidth,
                opts.f0, rep.variance_mismatch, rep.variances_agree ? "agree" : "DISAGREE");
    if (!c.out.empty() || !cfg.output.empty()) {
        Run run("verify noise-decorrelation", output_dir(cfg, "verify"));
        t.add("t", ts);
        t.add("xi", xs);
        t.add("cov", cv);
        t.add("pcov", pc);
        t.add("bound", bd);
        t.add("pass", ok);
        io::write_table_csv(run.file("decorrelation.csv"), t);
        run.manifest()["all_pass"] = rep.all_pass();
        run.manifest()["variances_agree"] = rep.variances_agree;
        run.finish();
    }
    const bool pass = rep.all_pass() && rep.variances_agree;
    std::printf("%s\n", pass ? "PASS" : "FAIL");
    return pass ? 0 : static_cast<int>(ErrorClass::numerical);
}

int verify_acceptance(const Common& c, std::optional<std::uint64_t> seed, const std::vector<int>& only) {
    auto cfg = load_config(c);
    acceptance::Suite suite(seed.value_or(cfg.seed));
    std::vector<int> ids = only;
    if (ids.empty()) {
        for (int i = 1; i <= acceptance::Suite::count; ++i) ids.push_back(i);
    }
    int failed = 0;
    json results = json::array();
    for (int id : ids) {
        const auto r = suite.run(id);
        std::printf("%s\n", acceptance::format_line(r).c_str());
        std::fflush(stdout);
        failed += r.pass ? 0 : 1;
        results.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    }
    if (!c.out.empty() || !cfg.output.empty()) {
        Run run("verify acceptance", output_dir(cfg, "verify"));
        io::write_file_atomic(run.file("acceptance.json"), results.dump(2) + "\n");
        run.finish();
    }
    return failed == 0 ? 0 : static_cast<int>(ErrorClass::numerical);
}

double best_lag_correlation(const std::vector<double>& a, const std::vector<double>& b, long max_lag) {
    const std::size_t n = std::min(a.size(), b.size());
    const std::size_t i0 = n / 10, i1 = n - n / 10;
    double best = -1.0;
    for (long lag = -max_lag; lag <= max_lag; ++lag) {
        double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0, cnt = 0;
        for (std::size_t i = i0; i < i1; ++i) {
            const long j = static_cast<long>(i) + lag;
            if (j < 0 || j >= static_cast<long>(n)) continue;
            const double x = a[static_cast<std::size_t>(j)], y = b[i];
            sa += x;
            sb += y;
            saa += x * x;
            sbb += y * y;
            sab += x * y;
            cnt += 1;
        }
        const double d = std::sqrt((saa - sa * sa / cnt) * (sbb - sb * sb / cnt));
        if (d > 0.0) best = std::max(best, (sab - sa * sb / cnt) / d);
    }
    return best;
}

int cmd_score(const std::string& truth_path, const std::string& outputs_path, int harmonic, double threshold) {
    const auto truth = io::read_table_csv(truth_path);
    const auto outputs = io::read_table_csv(outputs_path);
    const auto& ref = truth.column("riav_" + std::to_string(harmonic));
    const auto& est = outputs.column("R_" + std::to_string(harmonic));
    if (ref.size() != est.size()) throw IngestError("score: truth and outputs differ in length");
    const auto& t = truth.column("t");
    const double fs = t.size() > 1 ? (t.size() - 1) / (t.back() - t.front()) : 1.0;
    const auto& rate = truth.column("resp_rate");
    std::vector<double> sorted = rate;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(sorted.size() / 2), sorted.end());
    const double period = 1.0 / sorted[sorted.size() / 2];
    const double r = best_lag_correlation(est, ref, static_cast<long>(0.5 * period * fs));
    const auto& irr = outputs.column("irr");
    double err = 0.0;
    const std::size_t n = irr.size();
    for (std::size_t i = n / 10; i < n - n / 10; ++i) err += std::abs(irr[i] - rate[i]);
    err /= static_cast<double>(n - 2 * (n / 10));
    std::printf("harmonic %d: r = %.4f (threshold %.2f) %s\n", harmonic, r, threshold, r >= threshold ? "PASS" : "FAIL");
    std::printf("mean |IRR error| on the interior: %.4g Hz\n", err);
    return r >= threshold ? 0 : static_cast<int>(ErrorClass::numerical);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Respiratory signal extraction from PPG via shifted time-frequency ensembles"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    Common common;
    auto add_common = [&](CLI::App* sub, bool with_input) {
        sub->add_option("--config", common.config, "INI configuration file")->check(CLI::ExistingFile);
        sub->add_option("-o,--out", common.out, "output directory");
        if (with_input) {
            sub->add_option("-i,--in", common.input, "input CSV (t,value or one column with --fs)");
            sub->add_option("--fs", common.fs, "sample rate for single-column input");
        }
    };

    std::string preset, spec;
    std::optional<std::uint64_t> seed;
    std::optional<double> duration, noise_scale, fm_depth;
    bool no_noise = false;
    auto* synth = app.add_subcommand("synth", "synthesize a preset or spec with ground truth");
    add_common(synth, false);
    synth->add_option("--preset", preset, "semireal-a or semireal-b");
    synth->add_option("--spec", spec, "signal model INI file");
    synth->add_option("--seed", seed);
    synth->add_option("--duration", duration, "seconds");
    synth->add_option("--fs", common.fs, "sample rate");
    synth->add_option("--noise-scale", noise_scale);
    synth->add_option("--fm-depth", fm_depth);
    synth->add_flag("--no-noise", no_noise);

    std::string kind = "sst";
    double window = 10.0;
    std::optional<std::size_t> hop;
    std::string csv;
    bool magnitude = false, heatmap = false;
    auto* tfr = app.add_subcommand("tfr", "STFT or SST of a signal");
    add_common(tfr, true);
    tfr->add_option("--kind", kind, "stft or sst");
    tfr->add_option("--window", window, "window span L in seconds");
    tfr->add_option("--hop", hop, "frame hop in samples");
    tfr->add_option("--csv", csv, "also write magnitudes as CSV under this name");
    tfr->add_flag("--magnitude", magnitude, "store magnitudes only");
    tfr->add_flag("--pgm", heatmap, "write log heatmaps");

    std::optional<int> Q;
    std::optional<double> ihr;
    bool do_preprocess = false, intermediates = false;
    auto* tet = app.add_subcommand("tetris", "shifted SST ensemble");
    add_common(tet, true);
    tet->add_option("--Q", Q, "number of shifts");
    tet->add_option("--ihr", ihr, "constant heart-rate seed in Hz instead of cycle detection");
    tet->add_flag("--preprocess", do_preprocess, "resample and high-pass first");
    tet->add_flag("--intermediates", intermediates, "write every shifted SST");
    tet->add_flag("--pgm", heatmap, "write log heatmaps");

    auto* ext = app.add_subcommand("extract", "respiratory signals from a PPG");
    add_common(ext, true);
    ext->add_flag("--intermediates", intermediates, "write shifted SSTs");
    ext->add_flag("--pgm", heatmap, "write log heatmaps");

    auto* base = app.add_subcommand("baseline", "envelope baselines tRIIV and tRIAV");
    add_common(base, true);
    base->add_flag("--preprocess", do_preprocess, "resample and high-pass first");

    std::string suite;
    std::optional<int> realizations;
    std::optional<double> f0;
    std::vector<int> only;
    auto* ver = app.add_subcommand("verify", "run a verification suite");
    add_common(ver, false);
    ver->add_option("suite", suite, "noise-decorrelation or acceptance")->required();
    ver->add_option("--seed", seed);
    ver->add_option("--realizations", realizations);
    ver->add_option("--f0", f0, "shift frequency for noise-decorrelation");
    ver->add_option("--criterion", only, "acceptance criteria to run");

    std::string truth, outputs;
    int harmonic = 1;
    double threshold = 0.9;
    auto* score = app.add_subcommand("score", "compare extract outputs with synth ground truth");
    score->add_option("--truth", truth)->required()->check(CLI::ExistingFile);
    score->add_option("--outputs", outputs)->required()->check(CLI::ExistingFile);
    score->add_option("--harmonic", harmonic);
    score->add_option("--threshold", threshold);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ErrorClass::config);
    }

    try {
        if (*synth) return cmd_synth(common, preset, spec, seed, duration, noise_scale, fm_depth, no_noise);
        if (*tfr) return cmd_tfr(common, kind, window, hop, csv, magnitude, heatmap);
        if (*tet) return cmd_tetris(common, Q, do_preprocess, ihr, intermediates, heatmap);
        if (*ext) return cmd_extract(common, intermediates, heatmap);
        if (*base) return cmd_baseline(common, do_preprocess);
        if (*ver) {
            if (suite == "noise-decorrelation") return verify_decorrelation(common, seed, realizations, f0);
            if (suite == "acceptance") return verify_acceptance(common, seed, only);
            throw InvalidArgument("verify: unknown suite '" + suite + "'");
        }
        if (*score) return cmd_score(truth, outputs, harmonic, threshold);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ErrorClass::numerical);
    }
    return 0;
}

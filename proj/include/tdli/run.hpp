#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "tdli/config.hpp"
#include "tdli/fit.hpp"
#include "tdli/io.hpp"
#include "tdli/oracles.hpp"
#include "tdli/parallel.hpp"
#include "tdli/scans.hpp"
#include "tdli/shots.hpp"
#include "tdli/version.hpp"

// Subcommand drivers shared by the CLI and the end-to-end tests. Each driver
// computes, writes a CSV data file plus a JSON summary into the output
// directory, and prints the artifact paths. Output bytes are a pure function
// of config + seed except for the timestamp metadata field.

namespace tdli {

struct RunOptions {
    std::string out_dir = ".";
    int threads = 0;            // 0 = all hardware threads
    std::string model_override; // "", "quantum", "classical", "both"
};

namespace detail {

inline std::string iso_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::string model_tag(Model m) { return m == Model::quantum ? "quantum" : "classical"; }

inline std::vector<Model> effective_models(const RunConfig& cfg, const RunOptions& ropt) {
    if (ropt.model_override.empty()) return cfg.scan.models;
    const Model classical = cfg.classical_strategy == ClassicalStrategy::moire
                                ? Model::classical_moire
                                : Model::classical_sin_linearized;
    if (ropt.model_override == "quantum") return {Model::quantum};
    if (ropt.model_override == "classical") return {classical};
    if (ropt.model_override == "both") return {Model::quantum, classical};
    throw config_error("--model must be quantum, classical, or both");
}

inline std::string strategy_name(ClassicalStrategy s) {
    return s == ClassicalStrategy::moire ? "moire" : "sin_linearized";
}

inline Table base_table(const RunConfig& cfg, const std::string& subcommand) {
    Table t;
    t.metadata["artifact_version"] = version_string;
    t.metadata["subcommand"] = subcommand;
    t.metadata["config_digest"] = config_digest(cfg.raw);
    t.metadata["seed"] = std::to_string(cfg.seed);
    t.metadata["timestamp"] = iso_timestamp();
    return t;
}

inline json base_summary(const RunConfig& cfg, const std::string& subcommand) {
    json s;
    s["artifact_version"] = version_string;
    s["subcommand"] = subcommand;
    s["config_digest"] = config_digest(cfg.raw);
    s["seed"] = cfg.seed;
    s["timestamp"] = iso_timestamp();
    return s;
}

inline std::string write_artifact(const RunOptions& ropt, const std::string& basename,
                                  const Table& t) {
    std::filesystem::create_directories(ropt.out_dir);
    const std::string path = (std::filesystem::path(ropt.out_dir) / basename).string();
    write_table_file(path, t);
    std::cout << "wrote " << path << "\n";
    return path;
}

inline std::string write_summary(const RunOptions& ropt, const std::string& basename,
                                 const json& j) {
    std::filesystem::create_directories(ropt.out_dir);
    const std::string path = (std::filesystem::path(ropt.out_dir) / basename).string();
    std::ofstream os(path);
    if (!os) throw config_error("cannot open for writing: " + path);
    os << j.dump(2) << "\n";
    if (!os) throw config_error("write failed: " + path);
    std::cout << "wrote " << path << "\n";
    return path;
}

} // namespace detail

// --- timing-scan -------------------------------------------------------------

inline int run_timing_scan(const RunConfig& cfg, const RunOptions& ropt) {
    const auto models = detail::effective_models(cfg, ropt);
    Table t = detail::base_table(cfg, "timing-scan");
    t.metadata["classical_strategy"] = detail::strategy_name(cfg.classical_strategy);
    t.metadata["cluster_size"] = std::to_string(cfg.scan.cluster_size);

    json summary = detail::base_summary(cfg, "timing-scan");
    Column dt_col{"delta_t", "ns", {}};
    Column base_col{"baseline", "1", {}};
    std::vector<Column> model_cols;

    bool first = true;
    for (Model m : models) {
        const ScanResult r = timing_scan(cfg.setup, cfg.scan.cluster_size, cfg.scan.lo,
                                         cfg.scan.hi, cfg.scan.steps, m, {}, ropt.threads);
        Column sig{"signal_" + detail::model_tag(m), "1", {}};
        Column con{"delta_sn_" + detail::model_tag(m), "1", {}};
        for (const ScanPoint& p : r.points) {
            if (first) {
                dt_col.values.push_back(units::s_to_ns(p.x));
                base_col.values.push_back(p.s.baseline);
            }
            sig.values.push_back(p.s.total());
            con.values.push_back(p.contrast);
        }
        model_cols.push_back(std::move(sig));
        model_cols.push_back(std::move(con));
        first = false;
    }
    t.columns.push_back(std::move(dt_col));
    t.columns.push_back(std::move(base_col));
    for (Column& c : model_cols) t.columns.push_back(std::move(c));

    // Envelope readout on the leading model's contrast.
    if (t.rows() >= 8) {
        const std::vector<double>& xs = t.columns[0].values;
        const std::vector<double>& ys = t.columns[3].values; // first delta_sn column
        const GaussianFit g = fit_gaussian(xs, ys);
        summary["envelope_fit"] = {{"center_ns", g.center},
                                   {"fwhm_ns", g.fwhm()},
                                   {"amplitude", g.amplitude},
                                   {"offset", g.offset},
                                   {"converged", g.converged}};
    }
    const ClusterSpecies sp = cfg.setup.species(cfg.scan.cluster_size);
    const double G = constants::two_pi / cfg.setup.period();
    summary["analytic_envelope_fwhm_ns"] =
        units::s_to_ns(timing_envelope_fwhm(cfg.setup.sigma_v, G));
    // The divergence that reproduces sigma_v, quoted under each convention.
    const double hw = std::sqrt(2.0 * std::log(2.0));
    summary["divergence_mrad"] = {
        {"sigma", units::rad_to_mrad(cfg.setup.sigma_v / cfg.setup.v_forward)},
        {"hwhm", units::rad_to_mrad(hw * cfg.setup.sigma_v / cfg.setup.v_forward)},
        {"fwhm", units::rad_to_mrad(2.0 * hw * cfg.setup.sigma_v / cfg.setup.v_forward)}};
    summary["talbot_time_us"] = units::s_to_us(talbot_time(sp.mass_kg, cfg.setup.period()));
    summary["pulse_delay_us"] = units::s_to_us(cfg.setup.pulse_delay_s);

    const std::string csv = cfg.output_prefix + "_timing_scan.csv";
    summary["files"] = {{"data", csv}};
    detail::write_artifact(ropt, csv, t);
    detail::write_summary(ropt, cfg.output_prefix + "_timing_scan_summary.json", summary);
    return 0;
}

// --- mass-scan ---------------------------------------------------------------

inline int run_mass_scan(const RunConfig& cfg, const RunOptions& ropt) {
    const auto models = detail::effective_models(cfg, ropt);
    Table t = detail::base_table(cfg, "mass-scan");
    t.metadata["classical_strategy"] = detail::strategy_name(cfg.classical_strategy);

    Column size_col{"cluster_size", "1", {}};
    Column mass_col{"mass", "amu", {}};
    for (int n = cfg.scan.size_min; n <= cfg.scan.size_max; ++n) {
        size_col.values.push_back(n);
        mass_col.values.push_back(cfg.setup.species(n).mass_amu());
    }
    t.columns.push_back(std::move(size_col));
    t.columns.push_back(std::move(mass_col));

    json summary = detail::base_summary(cfg, "mass-scan");
    for (Model m : models) {
        auto scan_with_scale = [&](double alpha_scale) {
            ExperimentSetup s2 = cfg.setup;
            s2.polarizability_scale *= alpha_scale;
            return mass_scan(s2, cfg.scan.size_min, cfg.scan.size_max, m, cfg.scan.smear, {},
                             ropt.threads);
        };
        const ScanResult center = scan_with_scale(1.0);
        Column con{"delta_sn_" + detail::model_tag(m), "1", {}};
        for (const ScanPoint& p : center.points) con.values.push_back(p.contrast);
        t.columns.push_back(std::move(con));

        int peak_size = cfg.scan.size_min;
        double peak_val = -1.0;
        for (const ScanPoint& p : center.points)
            if (std::fabs(p.contrast) > peak_val) {
                peak_val = std::fabs(p.contrast);
                peak_size = static_cast<int>(p.x);
            }
        summary["peak_size_" + detail::model_tag(m)] = peak_size;

        if (cfg.scan.polarizability_band) {
            for (const double s : {0.7, 1.3}) {
                const ScanResult band = scan_with_scale(s);
                Column c{"delta_sn_" + detail::model_tag(m) + (s < 1.0 ? "_alpha_lo" : "_alpha_hi"),
                         "1", {}};
                for (const ScanPoint& p : band.points) c.values.push_back(p.contrast);
                t.columns.push_back(std::move(c));
            }
        }
    }

    const std::string csv = cfg.output_prefix + "_mass_scan.csv";
    json files = {{"data", csv}};
    summary["files"] = files;
    detail::write_artifact(ropt, csv, t);
    detail::write_summary(ropt, cfg.output_prefix + "_mass_scan_summary.json", summary);
    return 0;
}

// --- height-scan -------------------------------------------------------------

inline int run_height_scan(const RunConfig& cfg, const RunOptions& ropt) {
    const auto models = detail::effective_models(cfg, ropt);
    Table t = detail::base_table(cfg, "height-scan");
    t.metadata["cluster_size"] = std::to_string(cfg.scan.cluster_size);

    json summary = detail::base_summary(cfg, "height-scan");
    Column h_col{"height", "mm", {}};
    bool first = true;
    for (Model m : models) {
        const ScanResult r = height_scan(cfg.setup, cfg.scan.cluster_size, cfg.scan.lo,
                                         cfg.scan.hi, cfg.scan.steps, m, {}, ropt.threads);
        Column con{"delta_sn_" + detail::model_tag(m), "1", {}};
        for (const ScanPoint& p : r.points) {
            if (first) h_col.values.push_back(units::m_to_mm(p.x));
            con.values.push_back(p.contrast);
        }
        if (first) t.columns.push_back(std::move(h_col));
        t.columns.push_back(std::move(con));
        first = false;
    }

    if (t.rows() >= 8) {
        const DampedSineFit f = fit_damped_sine(t.columns[0].values, t.columns[1].values);
        summary["fringe_fit"] = {{"period_mm", f.period},
                                 {"phase_rad", f.phase},
                                 {"decay_mm", std::isfinite(f.decay) ? json(f.decay) : json()},
                                 {"amplitude", f.amplitude},
                                 {"offset", f.offset},
                                 {"converged", f.converged}};
    }
    if (cfg.setup.tilt_theta != 0.0)
        summary["analytic_period_mm"] =
            units::m_to_mm(tilt_height_period(cfg.setup.period(), cfg.setup.tilt_theta));

    const std::string csv = cfg.output_prefix + "_height_scan.csv";
    summary["files"] = {{"data", csv}};
    detail::write_artifact(ropt, csv, t);
    detail::write_summary(ropt, cfg.output_prefix + "_height_scan_summary.json", summary);
    return 0;
}

// --- accel-scan ----------------------------------------------------------------

// Reads the fringe position at each acceleration by scanning the third pulse
// over one period and fitting the fixed-period fringe.
inline int run_accel_scan(const RunConfig& cfg, const RunOptions& ropt) {
    const auto models = detail::effective_models(cfg, ropt);
    const Model m = models.front();
    const ClusterSpecies sp = cfg.setup.species(cfg.scan.cluster_size);
    const PulseSequence seq = cfg.setup.sequence(sp);
    const BeamEnsemble beam = cfg.setup.beam();
    const double d = cfg.setup.period();
    const double t1 = seq.pulses[0].fire_time_s;
    const double t2 = seq.pulses[1].fire_time_s;
    const double t3 = seq.pulses[2].fire_time_s;
    const int offset_steps = 24;

    struct Point {
        double a, contrast, modulation, position;
    };
    std::vector<Point> pts(static_cast<std::size_t>(cfg.scan.steps));
    parallel_for(pts.size(), ropt.threads, [&](std::size_t i) {
        const double a = cfg.scan.lo + (cfg.scan.hi - cfg.scan.lo) *
                                           static_cast<double>(i) / (cfg.scan.steps - 1);
        std::vector<double> xs, ys;
        Environment env = cfg.setup.environment();
        env.acceleration = a;
        SignalBreakdown at_zero{};
        for (int j = 0; j < offset_steps; ++j) {
            const double x3 = d * j / offset_steps;
            Environment env2 = env;
            env2.offsets[2] += x3;
            const SignalBreakdown s = three_pulse_signal(seq, sp, beam, env2, m, {});
            if (j == 0) at_zero = s;
            xs.push_back(x3);
            ys.push_back(s.total());
        }
        const FringeFit f = fit_fringe(xs, ys, d);
        pts[i] = {a, delta_sn(at_zero), at_zero.modulation, f.phase_offset};
    });

    Table t = detail::base_table(cfg, "accel-scan");
    t.metadata["cluster_size"] = std::to_string(cfg.scan.cluster_size);
    Column a_col{"acceleration", "m/s^2", {}};
    Column con{"delta_sn_" + detail::model_tag(m), "1", {}};
    Column pos{"fringe_position", "nm", {}};
    Column meas{"measured_shift", "nm", {}};
    Column pred{"predicted_shift", "nm", {}};
    for (const Point& p : pts) {
        a_col.values.push_back(p.a);
        con.values.push_back(p.contrast);
        pos.values.push_back(units::m_to_nm(p.position));
        const double rel = std::remainder(p.position - pts.front().position, d);
        meas.values.push_back(units::m_to_nm(rel));
        const double shift = acceleration_echo_shift(p.a - pts.front().a, t1, t2, t3);
        pred.values.push_back(units::m_to_nm(std::remainder(shift, d)));
    }
    t.columns = {a_col, con, pos, meas, pred};

    json summary = detail::base_summary(cfg, "accel-scan");
    double worst = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        worst = std::max(worst, std::fabs(meas.values[i] - pred.values[i]));
    summary["max_shift_error_nm"] = worst;
    summary["shift_per_g_nm"] =
        units::m_to_nm(std::fabs(acceleration_echo_shift(9.81, t1, t2, t3)));

    const std::string csv = cfg.output_prefix + "_accel_scan.csv";
    summary["files"] = {{"data", csv}};
    detail::write_artifact(ropt, csv, t);
    detail::write_summary(ropt, cfg.output_prefix + "_accel_scan_summary.json", summary);
    return 0;
}

// --- shots ---------------------------------------------------------------------

inline int run_synthesize_shots(const RunConfig& cfg, const RunOptions& ropt) {
    SynthesisOptions sopt;
    sopt.jitter = cfg.shots.jitter;
    sopt.n_shots = cfg.shots.n_shots;
    sopt.counts_per_unit_signal = cfg.shots.counts_per_unit_signal;
    sopt.nominal_energy_j = cfg.shots.nominal_energy_j;
    sopt.model = cfg.shots.model;
    sopt.threads = ropt.threads;

    json summary = detail::base_summary(cfg, "synthesize-shots");
    const std::string digest = config_digest(cfg.raw);

    json streams = json::array();
    for (const bool reference : {false, true}) {
        ExperimentSetup setup = cfg.setup;
        if (reference) setup.delta_t_s = cfg.shots.reference_delta_t_s;
        sopt.seed = mix_seed(cfg.seed, reference ? 2 : 1);
        const std::vector<ShotRecord> shots = synthesize_shots(setup, cfg.shots.bins, sopt);

        ShotStreamHeader h;
        h.seed = sopt.seed;
        h.truth_digest = digest;
        h.bins = cfg.shots.bins;
        const std::string name =
            cfg.output_prefix + (reference ? "_reference.jsonl" : "_resonant.jsonl");
        std::filesystem::create_directories(ropt.out_dir);
        const std::string path = (std::filesystem::path(ropt.out_dir) / name).string();
        write_shots_file(path, h, shots);
        std::cout << "wrote " << path << "\n";

        json truth = json::array();
        for (int bin : cfg.shots.bins) {
            const ClusterSpecies sp = setup.species(bin);
            const SignalBreakdown s = three_pulse_signal(
                setup.sequence(sp), sp, setup.beam(), setup.environment(), cfg.shots.model, {});
            truth.push_back({{"bin", bin},
                             {"expected_rate", cfg.shots.counts_per_unit_signal * s.total()},
                             {"delta_sn", delta_sn(s)}});
        }
        streams.push_back({{"file", name},
                           {"delta_t_ns", units::s_to_ns(setup.delta_t_s)},
                           {"seed", sopt.seed},
                           {"n_shots", cfg.shots.n_shots},
                           {"truth", truth}});
    }
    summary["streams"] = streams;
    detail::write_summary(ropt, cfg.output_prefix + "_shots_summary.json", summary);
    return 0;
}

inline int run_analyze_shots(const RunConfig& cfg, const RunOptions& ropt,
                             std::string resonant_path = "", std::string reference_path = "") {
    if (resonant_path.empty())
        resonant_path = (std::filesystem::path(ropt.out_dir) /
                         (cfg.output_prefix + "_resonant.jsonl")).string();
    if (reference_path.empty())
        reference_path = (std::filesystem::path(ropt.out_dir) /
                          (cfg.output_prefix + "_reference.jsonl")).string();
    const ShotStream resonant = read_shots_file(resonant_path);
    const ShotStream reference = read_shots_file(reference_path);

    Window energy_window; // full range unless a relative window is configured
    if (cfg.shots.energy_half_width_rel >= 0.0) {
        double lo = 0.0, hi = std::numeric_limits<double>::infinity();
        for (double e : cfg.shots.nominal_energy_j) {
            lo = std::max(lo, e * (1.0 - cfg.shots.energy_half_width_rel));
            hi = std::min(hi, e * (1.0 + cfg.shots.energy_half_width_rel));
        }
        energy_window = Window{lo, hi};
    }
    const Postselection res_sel =
        postselect(resonant.shots, energy_window,
                   Window::centered(cfg.setup.delta_t_s, cfg.shots.postselect_half_width_s));
    const Postselection ref_sel =
        postselect(reference.shots, energy_window,
                   Window::centered(cfg.shots.reference_delta_t_s,
                                    cfg.shots.postselect_half_width_s));
    if (res_sel.kept.empty() || ref_sel.kept.empty())
        throw config_error("analyze-shots: post-selection removed every shot");

    const std::vector<int>& bins =
        resonant.header.bins.empty() ? cfg.shots.bins : resonant.header.bins;

    Table t = detail::base_table(cfg, "analyze-shots");
    t.metadata["resonant_fraction"] = format_double(res_sel.fraction);
    t.metadata["reference_fraction"] = format_double(ref_sel.fraction);
    Column bin_col{"cluster_size", "1", {}};
    Column lr{"lambda_resonant", "1", {}}, sr{"sigma_resonant", "1", {}};
    Column lo{"lambda_reference", "1", {}}, so{"sigma_reference", "1", {}};
    Column dsn{"delta_sn", "1", {}}, dse{"delta_sn_sigma", "1", {}};

    json per_bin = json::array();
    for (std::size_t b = 0; b < bins.size(); ++b) {
        json rec;
        rec["bin"] = bins[b];
        double vals[6] = {constants::quiet_nan, constants::quiet_nan, constants::quiet_nan,
                          constants::quiet_nan, constants::quiet_nan, constants::quiet_nan};
        try {
            const RateEstimate r = rate_for_bin(res_sel.kept, b);
            const RateEstimate o = rate_for_bin(ref_sel.kept, b);
            const NormalizedSignal n = delta_sn_with_error(r, o);
            vals[0] = r.lambda;
            vals[1] = r.sigma_lambda;
            vals[2] = o.lambda;
            vals[3] = o.sigma_lambda;
            vals[4] = n.delta_sn;
            vals[5] = n.sigma;
            rec["low_confidence"] = r.low_confidence || o.low_confidence;
            rec["saturated"] = false;
        } catch (const saturated_bin_error&) {
            rec["saturated"] = true;
        }
        bin_col.values.push_back(bins[b]);
        lr.values.push_back(vals[0]);
        sr.values.push_back(vals[1]);
        lo.values.push_back(vals[2]);
        so.values.push_back(vals[3]);
        dsn.values.push_back(vals[4]);
        dse.values.push_back(vals[5]);
        rec["lambda_resonant"] = vals[0];
        rec["sigma_resonant"] = vals[1];
        rec["lambda_reference"] = vals[2];
        rec["sigma_reference"] = vals[3];
        rec["delta_sn"] = vals[4];
        rec["delta_sn_sigma"] = vals[5];
        per_bin.push_back(rec);
    }
    t.columns = {bin_col, lr, sr, lo, so, dsn, dse};

    json summary = detail::base_summary(cfg, "analyze-shots");
    summary["resonant_fraction"] = res_sel.fraction;
    summary["reference_fraction"] = ref_sel.fraction;
    summary["resonant_kept"] = res_sel.kept.size();
    summary["reference_kept"] = ref_sel.kept.size();
    summary["bins"] = per_bin;

    const std::string csv = cfg.output_prefix + "_analysis.csv";
    summary["files"] = {{"data", csv}};
    detail::write_artifact(ropt, csv, t);
    detail::write_summary(ropt, cfg.output_prefix + "_analysis_summary.json", summary);
    return 0;
}

// --- oracle-check ----------------------------------------------------------------

// Reruns the pinning suite: engine vs wavefunction grid over the standard
// parameter lattice, engine vs classical Monte Carlo on representative
// settings, and the coefficient integrals. Any miss throws oracle_error
// after the table is written.
inline int run_oracle_check(const RunConfig& cfg, const RunOptions& ropt) {
    struct Row {
        std::string name;
        double measure;   // relative error or |pull|
        double threshold;
        bool pass;
    };
    std::vector<Row> rows;

    const double T = 18.9e-6;
    const double d = 78.815e-9;

    // Engine vs grid propagation over the full lattice.
    {
        const double n0s[] = {0.0, 0.5, 2.0, 4.0};
        const double phis[] = {0.0, 1.0, 3.0};
        const double xis[] = {0.1, 0.5, 1.0};
        const double dts[] = {0.0, 50e-9, 200e-9};
        struct Case {
            double n0, phi, xi, dt;
        };
        std::vector<Case> cases;
        for (double n0 : n0s)
            for (double phi : phis)
                for (double xi : xis)
                    for (double dt : dts) cases.push_back({n0, phi, xi, dt});

        std::vector<double> errs(cases.size());
        parallel_for(cases.size(), ropt.threads, [&](std::size_t i) {
            const Case& c = cases[i];
            const double mass = constants::planck_h * (T / c.xi) / (d * d);
            const ClusterSpecies sp = make_species(1, mass, 1e-20, 25e-30);
            GratingPulse proto = make_pulse(0.0, d, c.n0, c.phi);
            const PulseSequence seq = make_symmetric_sequence(proto, T, c.dt);
            BeamEnsemble beam;
            beam.transverse = discretize_gaussian(0.0, 0.62, 16);
            const Environment env{};
            const SignalBreakdown s = three_pulse_signal(seq, sp, beam, env, Model::quantum, {});
            GridOptions gopt;
            gopt.points = 1024;
            const GridResult g = grid_signal(seq, sp, beam, env, gopt);
            errs[i] = std::fabs(s.total() - g.total) / std::fabs(g.total);
        });
        const double worst = *std::max_element(errs.begin(), errs.end());
        rows.push_back({"engine_vs_grid_rel", worst, 1e-6, worst <= 1e-6});
    }

    // Engine vs classical trajectory Monte Carlo, 3 SE at 1e6 samples.
    {
        struct Setting {
            double n0, phi, dt, x2, eta, a;
        };
        const Setting settings[] = {
            {2.0, 1.0, 0.0, 0.0, 1.0, 0.0},   {2.0, 1.0, 50e-9, 0.0, 1.0, 0.0},
            {4.0, 3.0, 0.0, 0.0, 1.0, 0.0},   {0.5, 0.0, 0.0, 0.0, 1.0, 0.0},
            {2.0, 1.0, 0.0, d / 8, 1.0, 0.0}, {2.0, 1.0, 0.0, 0.0, 0.6, 9.81},
        };
        std::vector<double> pulls(std::size(settings));
        parallel_for(pulls.size(), ropt.threads, [&](std::size_t i) {
            const Setting& st = settings[i];
            const double mass = constants::planck_h * T / (d * d);
            ClusterSpecies sp = make_species(1, mass, 1e-20, 25e-30);
            sp.yield = YieldModel::constant(st.eta);
            GratingPulse proto = make_pulse(0.0, d, st.n0, st.phi);
            const PulseSequence seq = make_symmetric_sequence(proto, T, st.dt);
            BeamEnsemble beam;
            beam.transverse = TransverseEnsemble::gaussian(0.0, 0.62);
            Environment env{};
            env.offsets[1] = st.x2;
            env.acceleration = st.a;
            const SignalBreakdown s =
                three_pulse_signal(seq, sp, beam, env, Model::classical_moire, {});
            const MonteCarloResult mc =
                classical_mc_signal(seq, sp, beam, env, 1000000, mix_seed(cfg.seed, 77 + i));
            pulls[i] = std::fabs(s.total() - mc.signal) / mc.std_error;
        });
        const double worst = *std::max_element(pulls.begin(), pulls.end());
        rows.push_back({"engine_vs_classical_mc_pull", worst, 3.0, worst <= 3.0});
    }

    // Grating coefficients vs direct quadrature.
    {
        double worst_amp = 0.0, worst_mask = 0.0;
        for (const double n0 : {0.5, 2.0, 4.0})
            for (const double phi : {0.0, 1.0, 3.0}) {
                const AmplitudeTable amps = amplitude_coefficients(n0, phi, 1.0);
                for (int m = -3; m <= 3; ++m) {
                    const cplx q = amplitude_quadrature(m, n0, phi, 1.0);
                    worst_amp = std::max(worst_amp, std::abs(amps.amp(m) - q));
                }
                for (int n = 0; n <= 3; ++n) {
                    const double q = mask_quadrature(n, n0, 1.0);
                    worst_mask =
                        std::max(worst_mask, std::fabs(mask_coefficient(n, n0, 1.0) - q));
                }
            }
        rows.push_back({"amplitude_coeff_vs_quadrature", worst_amp, 1e-12, worst_amp <= 1e-12});
        rows.push_back({"mask_coeff_vs_quadrature", worst_mask, 1e-12, worst_mask <= 1e-12});
    }

    // Modified Bessel backend vs long-double quadrature, floor-aware.
    {
        double worst_ratio = 0.0;
        for (const double re : {-8.0, -2.0, 0.0})
            for (const double im : {0.0, 1.5, 12.0})
                for (const int m : {0, 1, 5, 12}) {
                    const cplx z{re, im};
                    if (std::abs(z) == 0.0) continue;
                    const QuadratureBessel q = bessel_quadrature(m, z);
                    const cplx val = bessel_i(m, z);
                    const double tol = 1e-13 * std::abs(q.value) + q.floor;
                    worst_ratio = std::max(worst_ratio, std::abs(val - q.value) / tol);
                }
        rows.push_back({"bessel_vs_quadrature_ratio", worst_ratio, 1.0, worst_ratio <= 1.0});
    }

    Table t = detail::base_table(cfg, "oracle-check");
    Column id{"check_id", "1", {}}, measure{"measure", "1", {}}, thr{"threshold", "1", {}},
        pass{"pass", "1", {}};
    json checks = json::array();
    bool all_pass = true;
    std::printf("%-34s %14s %12s  %s\n", "check", "measure", "threshold", "status");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& r = rows[i];
        std::printf("%-34s %14.6e %12.1e  %s\n", r.name.c_str(), r.measure, r.threshold,
                    r.pass ? "pass" : "FAIL");
        id.values.push_back(static_cast<double>(i));
        measure.values.push_back(r.measure);
        thr.values.push_back(r.threshold);
        pass.values.push_back(r.pass ? 1.0 : 0.0);
        checks.push_back({{"id", i},
                          {"name", r.name},
                          {"measure", r.measure},
                          {"threshold", r.threshold},
                          {"pass", r.pass}});
        all_pass = all_pass && r.pass;
    }
    t.columns = {id, measure, thr, pass};

    json summary = detail::base_summary(cfg, "oracle-check");
    summary["checks"] = checks;
    summary["all_pass"] = all_pass;

    const std::string csv = cfg.output_prefix + "_oracle_check.csv";
    summary["files"] = {{"data", csv}};
    detail::write_artifact(ropt, csv, t);
    detail::write_summary(ropt, cfg.output_prefix + "_oracle_check_summary.json", summary);
    if (!all_pass) throw oracle_error("oracle-check: at least one reference check failed");
    return 0;
}

// --- fit -----------------------------------------------------------------------

inline int run_fit(const std::string& kind, const std::string& input_path,
                   const std::string& x_column, const std::string& y_column,
                   const RunOptions& ropt) {
    const Table t = read_table_file(input_path);
    if (t.columns.empty() || t.rows() < 8)
        throw config_error("fit: input needs at least 8 rows");

    auto find_col = [&](const std::string& name, std::size_t fallback) -> const Column& {
        if (name.empty()) return t.columns.at(fallback);
        for (const Column& c : t.columns)
            if (c.name == name) return c;
        throw config_error("fit: no column named '" + name + "'");
    };
    const Column& xc = find_col(x_column, 0);
    const Column& yc = find_col(y_column, t.columns.size() - 1);

    json summary;
    summary["artifact_version"] = version_string;
    summary["subcommand"] = "fit";
    summary["timestamp"] = detail::iso_timestamp();
    summary["input"] = std::filesystem::path(input_path).filename().string();
    summary["x_column"] = xc.name;
    summary["y_column"] = yc.name;

    bool converged = false;
    if (kind == "gaussian") {
        const GaussianFit g = fit_gaussian(xc.values, yc.values);
        summary["fit"] = {{"kind", "gaussian"},      {"amplitude", g.amplitude},
                          {"center", g.center},      {"sigma", g.sigma},
                          {"fwhm", g.fwhm()},        {"offset", g.offset},
                          {"rss", g.rss},            {"converged", g.converged}};
        converged = g.converged;
        std::printf("gaussian: center=%.8g fwhm=%.8g amplitude=%.8g offset=%.8g rss=%.3e\n",
                    g.center, g.fwhm(), g.amplitude, g.offset, g.rss);
    } else if (kind == "damped-sine") {
        const DampedSineFit f = fit_damped_sine(xc.values, yc.values);
        summary["fit"] = {{"kind", "damped-sine"},
                          {"period", f.period},
                          {"phase_rad", f.phase},
                          {"decay", std::isfinite(f.decay) ? json(f.decay) : json()},
                          {"amplitude", f.amplitude},
                          {"offset", f.offset},
                          {"rss", f.rss},
                          {"converged", f.converged}};
        converged = f.converged;
        std::printf("damped-sine: period=%.8g phase=%.8g decay=%.8g amplitude=%.8g rss=%.3e\n",
                    f.period, f.phase, f.decay, f.amplitude, f.rss);
    } else {
        throw config_error("fit: kind must be 'gaussian' or 'damped-sine'");
    }

    const std::string base =
        std::filesystem::path(input_path).stem().string() + "_fit_summary.json";
    detail::write_summary(ropt, base, summary);
    if (!converged) throw convergence_error("fit: did not converge; best-so-far written");
    return 0;
}

} // namespace tdli

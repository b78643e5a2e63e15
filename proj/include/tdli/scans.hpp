#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tdli/ensemble.hpp"
#include "tdli/parallel.hpp"
#include "tdli/setup.hpp"
#include "tdli/signal.hpp"

// Parameter scans built on the echo engine. Every scan returns plain columns
// (abscissa, baseline, modulation, contrast) so the writers and fitters never
// need to know which lever was moved. Points are independent, so scans
// parallelize over the grid; each index writes only its own slot.

namespace tdli {

struct ScanPoint {
    double x = 0.0;
    SignalBreakdown s{};
    double contrast = 0.0; // delta_sn at this point
};

struct ScanResult {
    std::string axis;  // e.g. "delta_t"
    std::string unit;  // e.g. "s"
    std::vector<ScanPoint> points;
};

namespace detail {

inline ScanPoint eval_point(double x, const PulseSequence& seq, const ClusterSpecies& sp,
                            const BeamEnsemble& beam, const Environment& env, Model model,
                            const SignalOptions& opt) {
    ScanPoint p;
    p.x = x;
    p.s = three_pulse_signal(seq, sp, beam, env, model, opt);
    p.contrast = delta_sn(p.s);
    return p;
}

} // namespace detail

// Pulse-delay asymmetry scan at fixed T for one cluster size.
inline ScanResult timing_scan(const ExperimentSetup& setup, int cluster_size, double dt_min_s,
                              double dt_max_s, int steps, Model model = Model::quantum,
                              const SignalOptions& opt = {}, int threads = 1) {
    if (steps < 2) throw std::domain_error("timing_scan: need at least 2 steps");
    const ClusterSpecies sp = setup.species(cluster_size);
    const BeamEnsemble beam = setup.beam();
    const Environment env = setup.environment();
    ScanResult r;
    r.axis = "delta_t";
    r.unit = "s";
    r.points.resize(static_cast<std::size_t>(steps));
    parallel_for(static_cast<std::size_t>(steps), threads, [&](std::size_t i) {
        const double dt = dt_min_s + (dt_max_s - dt_min_s) * static_cast<double>(i) / (steps - 1);
        ExperimentSetup s2 = setup;
        s2.delta_t_s = dt;
        r.points[i] = detail::eval_point(dt, s2.sequence(sp), sp, beam, env, model, opt);
    });
    return r;
}

// Contrast averaged over the finite mass window the detector accepts:
// a boxcar of full width m / resolving_power around the nominal mass, plus an
// optional Gaussian isotopic spread. Species properties other than the mass
// stay at their nominal-size values; only the Talbot time shifts.
inline double smeared_contrast(const ExperimentSetup& setup, const ClusterSpecies& nominal,
                               Model model, double resolving_power, double isotope_sigma_amu,
                               const SignalOptions& opt = {}) {
    const BeamEnsemble beam = setup.beam();
    const Environment env = setup.environment();
    const PulseSequence seq = setup.sequence(nominal);

    auto contrast_at_mass = [&](double mass_kg) {
        ClusterSpecies sp = nominal;
        sp.mass_kg = mass_kg;
        return delta_sn(three_pulse_signal(seq, sp, beam, env, model, opt));
    };

    std::vector<std::pair<double, double>> mass_weights; // (mass, weight)
    if (resolving_power > 0.0) {
        const int box_pts = 9;
        const double half = 0.5 * nominal.mass_kg / resolving_power;
        for (int i = 0; i < box_pts; ++i) {
            const double u = (i + 0.5) / box_pts; // midpoint rule
            mass_weights.push_back({nominal.mass_kg - half + 2.0 * half * u, 1.0 / box_pts});
        }
    } else {
        mass_weights.push_back({nominal.mass_kg, 1.0});
    }

    double acc = 0.0;
    if (isotope_sigma_amu > 0.0) {
        const QuadratureRule gh = gauss_hermite(7);
        for (const auto& [m0, w0] : mass_weights)
            for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
                const double m =
                    m0 + std::sqrt(2.0) * units::amu_to_kg(isotope_sigma_amu) * gh.nodes[i];
                acc += w0 * gh.weights[i] / std::sqrt(constants::pi) * contrast_at_mass(m);
            }
    } else {
        for (const auto& [m0, w0] : mass_weights) acc += w0 * contrast_at_mass(m0);
    }
    return acc;
}

struct MassScanOptions {
    double resolving_power = 0.0;   // 0 disables the boxcar
    double isotope_sigma_amu = 0.0; // 0 disables the isotopic smear
};

// Cluster-size scan at fixed pulse timing. The abscissa is the cluster size.
inline ScanResult mass_scan(const ExperimentSetup& setup, int n_min, int n_max,
                            Model model = Model::quantum, const MassScanOptions& mopt = {},
                            const SignalOptions& opt = {}, int threads = 1) {
    if (n_min < 1 || n_max < n_min) throw std::domain_error("mass_scan: bad size range");
    const BeamEnsemble beam = setup.beam();
    const Environment env = setup.environment();
    ScanResult r;
    r.axis = "cluster_size";
    r.unit = "1";
    r.points.resize(static_cast<std::size_t>(n_max - n_min + 1));
    parallel_for(r.points.size(), threads, [&](std::size_t i) {
        const int n = n_min + static_cast<int>(i);
        const ClusterSpecies sp = setup.species(n);
        ScanPoint p = detail::eval_point(static_cast<double>(n), setup.sequence(sp), sp, beam,
                                         env, model, opt);
        if (mopt.resolving_power > 0.0 || mopt.isotope_sigma_amu > 0.0)
            p.contrast = smeared_contrast(setup, sp, model, mopt.resolving_power,
                                          mopt.isotope_sigma_amu, opt);
        r.points[i] = p;
    });
    return r;
}

// Beam-height scan at fixed middle-pulse tilt: the tilt phase advances by one
// fringe per d / (2 (1 - cos theta)) of height.
inline ScanResult height_scan(const ExperimentSetup& setup, int cluster_size, double h_min_m,
                              double h_max_m, int steps, Model model = Model::quantum,
                              const SignalOptions& opt = {}, int threads = 1) {
    if (steps < 2) throw std::domain_error("height_scan: need at least 2 steps");
    const ClusterSpecies sp = setup.species(cluster_size);
    const PulseSequence seq = setup.sequence(sp);
    const Environment env = setup.environment();
    ScanResult r;
    r.axis = "height";
    r.unit = "m";
    r.points.resize(static_cast<std::size_t>(steps));
    parallel_for(static_cast<std::size_t>(steps), threads, [&](std::size_t i) {
        const double h = h_min_m + (h_max_m - h_min_m) * static_cast<double>(i) / (steps - 1);
        ExperimentSetup s2 = setup;
        s2.height_mean = h;
        r.points[i] = detail::eval_point(h, seq, sp, s2.beam(), env, model, opt);
    });
    return r;
}

// Acceleration scan: the fringe comb shifts rigidly by a (t1^2 - 2 t2^2 +
// t3^2)/2 along the third-pulse offset axis.
inline ScanResult acceleration_scan(const ExperimentSetup& setup, int cluster_size, double a_min,
                                    double a_max, int steps, Model model = Model::quantum,
                                    const SignalOptions& opt = {}, int threads = 1) {
    if (steps < 2) throw std::domain_error("acceleration_scan: need at least 2 steps");
    const ClusterSpecies sp = setup.species(cluster_size);
    const PulseSequence seq = setup.sequence(sp);
    const BeamEnsemble beam = setup.beam();
    ScanResult r;
    r.axis = "acceleration";
    r.unit = "m/s^2";
    r.points.resize(static_cast<std::size_t>(steps));
    parallel_for(static_cast<std::size_t>(steps), threads, [&](std::size_t i) {
        const double a = a_min + (a_max - a_min) * static_cast<double>(i) / (steps - 1);
        Environment env = setup.environment();
        env.acceleration = a;
        r.points[i] = detail::eval_point(a, seq, sp, beam, env, model, opt);
    });
    return r;
}

// Third-pulse offset scan over one period; used to read out fringe phase.
inline ScanResult offset_scan(const ExperimentSetup& setup, int cluster_size, int steps,
                              Model model = Model::quantum, const SignalOptions& opt = {},
                              int threads = 1) {
    if (steps < 4) throw std::domain_error("offset_scan: need at least 4 steps");
    const ClusterSpecies sp = setup.species(cluster_size);
    const PulseSequence seq = setup.sequence(sp);
    const BeamEnsemble beam = setup.beam();
    ScanResult r;
    r.axis = "offset_3";
    r.unit = "m";
    const double d = setup.period();
    r.points.resize(static_cast<std::size_t>(steps));
    parallel_for(static_cast<std::size_t>(steps), threads, [&](std::size_t i) {
        const double x3 = d * static_cast<double>(i) / steps;
        Environment env = setup.environment();
        env.offsets[2] += x3;
        r.points[i] = detail::eval_point(x3, seq, sp, beam, env, model, opt);
    });
    return r;
}

} // namespace tdli

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "tdli/errors.hpp"
#include "tdli/parallel.hpp"
#include "tdli/rng.hpp"
#include "tdli/setup.hpp"
#include "tdli/signal.hpp"

// Synthetic acquisition: per-shot laser timing and energy fluctuations drive
// the signal engine, whose expected yield seeds a Poisson count per mass bin.
// Analysis inverts the chain with the zero-count rate estimator.
//
// Jitter model. The quantity the experiment sorts on is the realized pulse
// asymmetry dT = t1 - 2 t2 + t3, and `short_fwhm` is the FWHM of that
// asymmetry. Internally the three lasers get independent Gaussian offsets of
// FWHM short_fwhm / sqrt(6) each, which reproduces exactly that asymmetry
// spread while keeping three genuinely distinct recorded fire times. A slow
// sinusoidal drift of amplitude `drift` (one cycle per run) rides on the
// third laser and models long-term timebase wander; sorting on dT is what
// compensates it.

namespace tdli {

struct JitterSpec {
    double short_fwhm_s = 7e-9; // FWHM of the realized pulse asymmetry dT
    double drift_s = 100e-9;    // slow sinusoid amplitude, applied to t3
    double energy_rel = 0.05;   // relative per-pulse energy spread

    void validate() const {
        if (short_fwhm_s < 0.0 || drift_s < 0.0 || energy_rel < 0.0 || energy_rel >= 0.5)
            throw std::domain_error("JitterSpec: spreads must be small and non-negative");
    }
};

struct ShotRecord {
    std::uint64_t shot_id = 0;
    std::array<double, 3> pulse_times_s{};
    std::array<double, 3> pulse_energies_j{};
    std::vector<std::uint32_t> counts; // one entry per mass bin

    double delta_t() const {
        return pulse_times_s[0] - 2.0 * pulse_times_s[1] + pulse_times_s[2];
    }
};

struct SynthesisOptions {
    JitterSpec jitter{};
    int n_shots = 10000;
    std::uint64_t seed = 1;
    // Expected counts per unit engine signal; sets the source brightness.
    double counts_per_unit_signal = 10.0;
    std::array<double, 3> nominal_energy_j{1.3e-3, 1.3e-3, 1.3e-3};
    Model model = Model::quantum;
    SignalOptions engine{};
    int threads = 1;
};

// Shots per RNG chunk. A fixed chunk size makes the stream a pure function
// of the seed, independent of thread count.
inline constexpr int shot_chunk = 128;

// Generates the full stream for the given mass bins (cluster sizes). Each
// shot evaluates the engine at the realized fire times and pulse energies;
// n0 and phi0 scale linearly with pulse energy.
inline std::vector<ShotRecord> synthesize_shots(const ExperimentSetup& setup,
                                                const std::vector<int>& bins,
                                                const SynthesisOptions& opt) {
    opt.jitter.validate();
    if (opt.n_shots < 1) throw std::domain_error("synthesize_shots: n_shots must be positive");
    if (bins.empty()) throw std::domain_error("synthesize_shots: no mass bins");
    if (!(opt.counts_per_unit_signal > 0.0))
        throw std::domain_error("synthesize_shots: brightness must be positive");
    for (double e : opt.nominal_energy_j)
        if (!(e > 0.0)) throw std::domain_error("synthesize_shots: energies must be positive");

    std::vector<ClusterSpecies> species;
    species.reserve(bins.size());
    for (int n : bins) species.push_back(setup.species(n));
    const BeamEnsemble beam = setup.beam();
    const Environment env = setup.environment();

    const double sigma_laser =
        opt.jitter.short_fwhm_s / (2.0 * std::sqrt(2.0 * std::log(2.0))) / std::sqrt(6.0);
    const std::array<double, 3> nominal_time{0.0, setup.pulse_delay_s,
                                             2.0 * setup.pulse_delay_s + setup.delta_t_s};

    const std::size_t n = static_cast<std::size_t>(opt.n_shots);
    std::vector<ShotRecord> shots(n);
    const std::size_t chunks = (n + shot_chunk - 1) / shot_chunk;

    parallel_for(chunks, opt.threads, [&](std::size_t chunk) {
        rng_engine rng(mix_seed(opt.seed, chunk));
        NormalSampler gauss;
        const std::size_t begin = chunk * shot_chunk;
        const std::size_t end = std::min(n, begin + shot_chunk);
        for (std::size_t i = begin; i < end; ++i) {
            ShotRecord& rec = shots[i];
            rec.shot_id = static_cast<std::uint64_t>(i);
            const double drift =
                opt.jitter.drift_s *
                std::sin(constants::two_pi * (static_cast<double>(i) + 0.5) / opt.n_shots);
            for (std::size_t k = 0; k < 3; ++k)
                rec.pulse_times_s[k] = nominal_time[k] + sigma_laser * gauss(rng);
            rec.pulse_times_s[2] += drift;
            for (std::size_t k = 0; k < 3; ++k) {
                const double e = opt.nominal_energy_j[k] *
                                 (1.0 + opt.jitter.energy_rel * gauss(rng));
                rec.pulse_energies_j[k] = std::max(e, 1e-12);
            }

            rec.counts.reserve(bins.size());
            for (std::size_t b = 0; b < bins.size(); ++b) {
                GratingPulse g1 = setup.pulse(0, species[b]);
                GratingPulse g2 = setup.pulse(1, species[b]);
                GratingPulse g3 = setup.pulse(2, species[b]);
                GratingPulse* gs[3] = {&g1, &g2, &g3};
                for (std::size_t k = 0; k < 3; ++k) {
                    const double scale = rec.pulse_energies_j[k] / opt.nominal_energy_j[k];
                    gs[k]->fire_time_s = rec.pulse_times_s[k];
                    gs[k]->n0 *= scale;
                    gs[k]->phi0 *= scale;
                }
                const PulseSequence seq = make_sequence(g1, g2, g3);
                const SignalBreakdown s =
                    three_pulse_signal(seq, species[b], beam, env, opt.model, opt.engine);
                const double lambda = opt.counts_per_unit_signal * s.total();
                rec.counts.push_back(static_cast<std::uint32_t>(poisson_sample(rng, lambda)));
            }
        }
    });
    return shots;
}

struct Window {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double x) const { return x >= lo && x <= hi; }
    static Window centered(double center, double half_width) {
        return Window{center - half_width, center + half_width};
    }
};

struct Postselection {
    std::vector<ShotRecord> kept; // original order
    double fraction = 0.0;
};

// Keeps shots whose three pulse energies all fall in energy_window and whose
// realized pulse asymmetry falls in dt_window.
inline Postselection postselect(const std::vector<ShotRecord>& shots, const Window& energy_window,
                                const Window& dt_window) {
    Postselection out;
    for (const ShotRecord& s : shots) {
        const bool energy_ok = energy_window.contains(s.pulse_energies_j[0]) &&
                               energy_window.contains(s.pulse_energies_j[1]) &&
                               energy_window.contains(s.pulse_energies_j[2]);
        if (energy_ok && dt_window.contains(s.delta_t())) out.kept.push_back(s);
    }
    out.fraction = shots.empty() ? 0.0 : static_cast<double>(out.kept.size()) / shots.size();
    return out;
}

struct RateEstimate {
    double lambda = 0.0;
    double sigma_lambda = 0.0;
    std::size_t n_shots = 0;
    bool low_confidence = false; // zero-count method degrades for lambda > 2
};

// Poisson rate from the fraction of empty shots: lambda = -ln P0, with the
// binomial error on P0 propagated through the log.
inline RateEstimate rate_from_zero_fraction(double p0, std::size_t n_shots) {
    if (n_shots == 0) throw std::domain_error("rate_from_zero_fraction: no shots");
    if (p0 < 0.0 || p0 > 1.0) throw std::domain_error("rate_from_zero_fraction: P0 outside [0,1]");
    if (p0 == 0.0)
        throw saturated_bin_error("rate_from_zero_fraction: every shot has counts; "
                                  "the zero-fraction estimator is undefined");
    RateEstimate r;
    r.lambda = -std::log(p0);
    r.sigma_lambda = std::sqrt(p0 * (1.0 - p0) / static_cast<double>(n_shots)) / p0;
    r.n_shots = n_shots;
    r.low_confidence = r.lambda > 2.0;
    return r;
}

inline RateEstimate rate_for_bin(const std::vector<ShotRecord>& shots, std::size_t bin) {
    if (shots.empty()) throw std::domain_error("rate_for_bin: no shots");
    std::size_t zeros = 0;
    for (const ShotRecord& s : shots) {
        if (bin >= s.counts.size()) throw std::out_of_range("rate_for_bin: bin index");
        if (s.counts[bin] == 0) ++zeros;
    }
    return rate_from_zero_fraction(static_cast<double>(zeros) / shots.size(), shots.size());
}

struct NormalizedSignal {
    double delta_sn = 0.0;
    double sigma = 0.0;
};

// Normalized signal difference between a resonant rate S_R and an
// off-resonant reference S_O, with Gaussian error propagation.
inline NormalizedSignal delta_sn_with_error(double s_r, double s_o, double ds_r, double ds_o) {
    if (!(s_o > 0.0))
        throw std::domain_error("delta_sn_with_error: degenerate reference (S_O must be > 0)");
    NormalizedSignal out;
    out.delta_sn = (s_r - s_o) / s_o;
    out.sigma = std::sqrt(ds_r * ds_r + (s_r / s_o) * (s_r / s_o) * ds_o * ds_o) / s_o;
    return out;
}

inline NormalizedSignal delta_sn_with_error(const RateEstimate& resonant,
                                            const RateEstimate& reference) {
    return delta_sn_with_error(resonant.lambda, reference.lambda, resonant.sigma_lambda,
                               reference.sigma_lambda);
}

} // namespace tdli

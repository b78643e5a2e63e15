#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "tdli/constants.hpp"
#include "tdli/ensemble.hpp"
#include "tdli/environment.hpp"
#include "tdli/errors.hpp"
#include "tdli/fft.hpp"
#include "tdli/pulses.hpp"
#include "tdli/rng.hpp"
#include "tdli/signal.hpp"
#include "tdli/species.hpp"

// Brute-force reference implementations. Each one reaches the observable
// through a different numerical route than the coefficient-space engine:
// real-space wavefunction propagation on a grid, stochastic classical
// trajectories, and direct quadrature of the defining integrals. They share
// only the physical definitions (pulse profile, falling frame, tilt
// displacement), never the engine's harmonic algebra. Tests freeze their
// outputs; the CLI exposes them through the oracle-check subcommand.

namespace tdli {

struct GridOptions {
    int points = 1024;          // samples per period, power of two
    double refine_tol = 1e-9;   // |S(2M) - S(M)| acceptance for self-consistency
    int max_points = 1 << 16;
    bool self_check = true;
};

namespace detail {

// Transmission profile of pulse k at absorption scale s: exp[(i phi0 - s n0 / 2) ...].
inline cplx pulse_profile(const GratingPulse& p, double x, double shift, double n0_scale) {
    const double c = std::cos(p.grating_wavenumber() * (x - shift));
    const cplx zeta{-0.5 * n0_scale * p.n0, p.phi0};
    return std::exp(0.5 * zeta * (1.0 + p.modulation * c));
}

inline double mask_profile(const GratingPulse& p, double x, double shift, double eta) {
    const double c = std::cos(p.grating_wavenumber() * (x - shift));
    return std::exp(-0.5 * eta * p.n0 * (1.0 + p.modulation * c));
}

// Effective lateral shift of pulse k for a molecule flying at height z above
// the mirror pivot, in the falling frame.
inline double pulse_shift(const PulseSequence& seq, const Environment& env, int k, double z) {
    const GratingPulse& p = seq.pulses[static_cast<std::size_t>(k)];
    const double t = p.fire_time_s - seq.pulses[0].fire_time_s;
    return env.offsets[static_cast<std::size_t>(k)] - 0.5 * env.acceleration * t * t +
           tilt_displacement(z, p.tilt_theta);
}

} // namespace detail

// Coherent single-velocity flux through the final mask, by split-step
// propagation of one grating period. The plane wave exp(i M v x / hbar) is
// factored out, so any velocity is representable on the periodic grid; its
// only trace is the linear phase m G v T acquired between pulses.
inline double grid_signal_single(const PulseSequence& seq, const ClusterSpecies& sp,
                                 double velocity, const Environment& env, double height,
                                 int points) {
    if (!is_power_of_two(static_cast<std::size_t>(points)) || points < 8)
        throw std::domain_error("grid_signal_single: points must be a power of two >= 8");
    const double d = seq.pulses[0].period_m;
    const double G = seq.pulses[0].grating_wavenumber();
    const double t_tal = talbot_time(sp.mass_kg, d);
    const double T1 = seq.delay_12();
    const double T2 = seq.delay_23();
    const double z = env.mount_height + height;

    const double s1 = detail::pulse_shift(seq, env, 0, z);
    const double s2 = detail::pulse_shift(seq, env, 1, z);
    const double s3 = detail::pulse_shift(seq, env, 2, z);

    const std::size_t M = static_cast<std::size_t>(points);
    std::vector<cplx> u(M);
    for (std::size_t j = 0; j < M; ++j) {
        const double x = d * static_cast<double>(j) / static_cast<double>(M);
        u[j] = detail::pulse_profile(seq.pulses[0], x, s1, 1.0);
    }

    auto propagate = [&](double T) {
        fft_inplace(u, false);
        // FFT bin j holds mode m = j for j < M/2 and m = j - M above.
        const double xi = T / t_tal;
        for (std::size_t j = 0; j < M; ++j) {
            const long mm = (j < M / 2) ? static_cast<long>(j)
                                        : static_cast<long>(j) - static_cast<long>(M);
            const double m = static_cast<double>(mm);
            const double ph = -(m * G * velocity * T + constants::pi * xi * m * m);
            u[j] *= std::polar(1.0, ph);
        }
        fft_inplace(u, true);
    };

    propagate(T1);
    for (std::size_t j = 0; j < M; ++j) {
        const double x = d * static_cast<double>(j) / static_cast<double>(M);
        u[j] *= detail::pulse_profile(seq.pulses[1], x, s2, 1.0);
    }
    propagate(T2);

    const double eta = sp.yield.value;
    double flux = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
        const double x = d * static_cast<double>(j) / static_cast<double>(M);
        flux += std::norm(u[j]) * detail::mask_profile(seq.pulses[2], x, s3, eta);
    }
    return flux / static_cast<double>(M);
}

struct GridResult {
    double total = 0.0;
    int points = 0; // finest grid actually used
};

// Ensemble-averaged grid signal with grid-doubling self-consistency, plus the
// yield pedestal for eta < 1 (the grid propagates the coherent channel only).
inline GridResult grid_signal(const PulseSequence& seq, const ClusterSpecies& sp,
                              const BeamEnsemble& beam, const Environment& env,
                              const GridOptions& opt = {}) {
    env.validate();
    if (!beam.transverse.discrete())
        throw oracle_error("grid_signal: needs a discrete velocity comb (discretize first)");
    if (beam.height.sigma != 0.0)
        throw oracle_error("grid_signal: needs a deterministic height (sigma_h = 0)");

    auto evaluate = [&](int points) {
        double s = 0.0;
        for (const auto& cls : beam.transverse.classes)
            s += cls.weight *
                 grid_signal_single(seq, sp, cls.velocity, env, beam.height.mean, points);
        return s;
    };

    GridResult out;
    out.points = opt.points;
    double s = evaluate(out.points);
    if (opt.self_check) {
        for (;;) {
            if (2 * out.points > opt.max_points)
                throw oracle_error("grid_signal: self-consistency not reached at max grid");
            const double s2 = evaluate(2 * out.points);
            const double diff = std::abs(s2 - s);
            s = s2;
            out.points *= 2;
            if (diff <= opt.refine_tol * std::max(1.0, std::abs(s))) break;
        }
    }

    const double eta = sp.yield.value;
    const double H1 = mask_coefficient(0, eta * seq.pulses[0].n0, seq.pulses[0].modulation);
    const double H2 = mask_coefficient(0, eta * seq.pulses[1].n0, seq.pulses[1].modulation);
    const double H3 = mask_coefficient(0, eta * seq.pulses[2].n0, seq.pulses[2].modulation);
    const double T1c = mask_coefficient(0, seq.pulses[0].n0, seq.pulses[0].modulation);
    const double T2c = mask_coefficient(0, seq.pulses[1].n0, seq.pulses[1].modulation);

    out.total = s + (H1 * H2 * H3 - T1c * T2c * H3);
    return out;
}

struct MonteCarloResult {
    double signal = 0.0;      // detected fraction
    double std_error = 0.0;
    std::uint64_t samples = 0;
};

// Classical trajectory reference: Bernoulli removal through each pulse with
// exponent eta n_k(x), deterministic momentum kick hbar phi0 V G sin(G x)/2
// at the first two pulses, ballistic drift in between, detection behind the
// final mask. Exact classical kinematics in the lab frame (uniform a).
inline MonteCarloResult classical_mc_signal(const PulseSequence& seq, const ClusterSpecies& sp,
                                            const BeamEnsemble& beam, const Environment& env,
                                            std::uint64_t samples, std::uint64_t seed) {
    env.validate();
    if (samples < 10000)
        throw oracle_error("classical_mc_signal: needs at least 1e4 samples");
    const double d = seq.pulses[0].period_m;
    const double G = seq.pulses[0].grating_wavenumber();
    const double eta = sp.yield.value;
    const double t1 = 0.0;
    const double t2 = seq.delay_12();
    const double t3 = seq.delay_12() + seq.delay_23();

    rng_engine rng(seed);
    NormalSampler normal;
    std::uint64_t kept = 0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        const double x0 = d * uniform_sample(rng);
        double v = beam.sample_transverse(rng, normal);
        const double z = env.mount_height + beam.sample_height(rng, normal);

        auto position = [&](double t, double x_ref, double v_now, double t_ref) {
            const double dt = t - t_ref;
            return x_ref + v_now * dt + 0.5 * env.acceleration * dt * dt;
        };
        auto mask_survives = [&](int k, double x) {
            const double shift = env.offsets[static_cast<std::size_t>(k)] +
                                 tilt_displacement(z, seq.pulses[static_cast<std::size_t>(k)].tilt_theta);
            const double p = detail::mask_profile(seq.pulses[static_cast<std::size_t>(k)], x, shift, eta);
            return uniform_sample(rng) < p;
        };
        auto kick = [&](int k, double x) {
            const GratingPulse& p = seq.pulses[static_cast<std::size_t>(k)];
            const double shift = env.offsets[static_cast<std::size_t>(k)] +
                                 tilt_displacement(z, p.tilt_theta);
            return -constants::hbar * p.phi0 * p.modulation * G *
                   std::sin(G * (x - shift)) / (2.0 * sp.mass_kg);
        };

        double x = x0;
        if (!mask_survives(0, x)) continue;
        v += kick(0, x);
        x = position(t2, x, v, t1);
        v += env.acceleration * (t2 - t1);
        if (!mask_survives(1, x)) continue;
        v += kick(1, x);
        const double x_at_3 = position(t3, x, v, t2);
        if (!mask_survives(2, x_at_3)) continue;
        ++kept;
    }

    MonteCarloResult r;
    r.samples = samples;
    r.signal = static_cast<double>(kept) / static_cast<double>(samples);
    const double p = r.signal;
    r.std_error = std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(samples));
    return r;
}

// Direct quadrature of the defining Fourier integrals, independent of the
// Bessel machinery. Long-double trapezoid on one period; exponentially
// convergent for these entire periodic integrands.
inline cplx amplitude_quadrature(int m, double n0, double phi0, double V, int nodes = 2048) {
    long double re = 0.0L, im = 0.0L;
    for (int j = 0; j < nodes; ++j) {
        const long double x = 2.0L * 3.141592653589793238462643383279502884L * j / nodes;
        const long double envl = 1.0L + static_cast<long double>(V) * std::cos(x);
        const long double amp = std::exp(-0.25L * static_cast<long double>(n0) * envl);
        const long double ph = 0.5L * static_cast<long double>(phi0) * envl -
                               static_cast<long double>(m) * x;
        re += amp * std::cos(ph);
        im += amp * std::sin(ph);
    }
    return cplx{static_cast<double>(re / nodes), static_cast<double>(im / nodes)};
}

inline double mask_quadrature(int n, double n0, double V, int nodes = 2048) {
    long double acc = 0.0L;
    for (int j = 0; j < nodes; ++j) {
        const long double x = 2.0L * 3.141592653589793238462643383279502884L * j / nodes;
        const long double envl = 1.0L + static_cast<long double>(V) * std::cos(x);
        acc += std::exp(-0.5L * static_cast<long double>(n0) * envl) *
               std::cos(static_cast<long double>(n) * x);
    }
    return static_cast<double>(acc / nodes);
}

// I_m(z) by long-double trapezoid of (1/pi) int_0^pi e^{z cos t} cos(m t) dt,
// with the resolution floor below which the quadrature cannot certify a
// relative comparison: roundoff is proportional to the integrand scale, not
// to the (possibly exponentially smaller) coefficient.
struct QuadratureBessel {
    cplx value;
    double floor; // absolute uncertainty of the reference itself
};

inline QuadratureBessel bessel_quadrature(int m, cplx z, int nodes = 2048) {
    const long double pi_l = 3.141592653589793238462643383279502884L;
    long double re = 0.0L, im = 0.0L;
    long double peak = 0.0L;
    for (int j = 0; j <= nodes; ++j) {
        const long double t = pi_l * j / nodes;
        const long double w = (j == 0 || j == nodes) ? 0.5L : 1.0L;
        const long double c = std::cos(t);
        const long double ex = std::exp(static_cast<long double>(z.real()) * c);
        const long double cm = std::cos(static_cast<long double>(m) * t);
        const long double arg = static_cast<long double>(z.imag()) * c;
        re += w * ex * std::cos(arg) * cm;
        im += w * ex * std::sin(arg) * cm;
        peak = std::max(peak, ex);
    }
    QuadratureBessel out;
    out.value = cplx{static_cast<double>(re / nodes), static_cast<double>(im / nodes)};
    out.floor = static_cast<double>(peak) * 1.1e-19 * std::sqrt(static_cast<double>(nodes)) * 8.0;
    return out;
}

} // namespace tdli

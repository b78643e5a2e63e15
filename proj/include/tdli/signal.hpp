#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "tdli/coefficients.hpp"
#include "tdli/constants.hpp"
#include "tdli/ensemble.hpp"
#include "tdli/environment.hpp"
#include "tdli/errors.hpp"
#include "tdli/pulses.hpp"
#include "tdli/species.hpp"

// Three-pulse echo signal.
//
// The detected flux behind the third pulse decomposes into grating harmonics
//     S = S_0 + 2 sum_{n>=1} Re[ K1_n K2_{2n} A_n^{(3)} W_n Z_n e^{i n Phi} ],
// where for the resonant echo (velocity phases stationary at T1 ~ T2)
//     K1_n = B_n^{(1)}(n (xi1 - xi2)),     K2_{2n} = B_{2n}^{(2)}(n xi2),
//     xi_k = T_k / t_talbot,
// A_n^(3) are the harmonics of the final removal mask, W_n the transverse
// velocity characteristic function at n G dT (dT = T2 - T1), Z_n the
// height-average of the tilt phase, and Phi collects the lateral offsets and
// the uniform-acceleration displacement. At dT = 0 the first-pulse factor is
// exactly the bare mask harmonic A_n^(1).
//
// Two kernel evaluation styles are provided. "echo_exact" evaluates the
// first- and middle-pulse factors at their stationary-phase arguments as
// above; it is what the wavefunction oracle reproduces. "midpoint" uses the
// bare A_n^(1) and evaluates the middle kernel at the midpoint time
// tau = (T + dT/2) / t_talbot; it is the conventional reduced formula and
// differs from echo_exact only at O(dT) in the kernel argument.
//
// For a discrete velocity comb the echo reduction is not valid (off-echo
// velocity phases do not average away), so the quantum model switches to an
// exact coefficient-space sum over all pulse-1 amplitude pairs; see
// discrete_plane_wave_signal below.
//
// Ionization yield eta < 1 dilutes the masks: a molecule that absorbs but is
// not removed keeps flying with which-path information and contributes a
// fringe-free pedestal. The coherent (zero-absorption) channel keeps the full
// n0 in the pulse-1/2 amplitudes, the final mask acts with eta n0, and the
// pedestal H1 H2 H3 - T1 T2 H3 (H_k, T_k the mean transmissions at eta n0_k
// and n0_k) lands in the baseline. The classical model has no coherent
// channel: every mask acts with eta n0_k while the kicks keep the full phi0.

namespace tdli {

enum class Model { quantum, classical_moire, classical_sin_linearized };
enum class TimingKernel { echo_exact, midpoint };

inline bool is_classical(Model m) { return m != Model::quantum; }

inline ClassicalStrategy strategy_of(Model m) {
    return m == Model::classical_sin_linearized ? ClassicalStrategy::sin_linearized
                                                : ClassicalStrategy::moire;
}

struct SignalOptions {
    TimingKernel timing_kernel = TimingKernel::echo_exact;
    int max_harmonic = 96;          // hard cap on the echo order
    double term_tolerance = 1e-15;  // relative harmonic cutoff
};

struct SignalBreakdown {
    double baseline = 0.0;   // n = 0 flux, including the yield pedestal
    double modulation = 0.0; // sum of the n != 0 fringe terms at this setting
    double total() const { return baseline + modulation; }
};

// Normalized fringe contrast: (resonant - reference) / reference with the
// reference taken as the fringe-free baseline.
inline double delta_sn(const SignalBreakdown& s) {
    if (!(s.baseline > 0.0)) throw std::domain_error("delta_sn: baseline must be > 0");
    return s.modulation / s.baseline;
}

namespace detail {

struct EchoGeometry {
    double G = 0.0;
    double t_talbot = 0.0;
    double T1 = 0.0, T2 = 0.0, dT = 0.0;
    double xi1 = 0.0, xi2 = 0.0, tau_mid = 0.0;
    std::array<double, 3> x_eff{};    // lateral offsets after the falling-frame shift
    std::array<double, 3> tilt_arm{}; // 1 - cos(theta_k)
};

inline EchoGeometry echo_geometry(const PulseSequence& seq, const ClusterSpecies& sp,
                                  const Environment& env) {
    EchoGeometry g;
    g.G = seq.pulses[0].grating_wavenumber();
    g.t_talbot = talbot_time(sp.mass_kg, seq.pulses[0].period_m);
    g.T1 = seq.delay_12();
    g.T2 = seq.delay_23();
    g.dT = g.T2 - g.T1;
    g.xi1 = g.T1 / g.t_talbot;
    g.xi2 = g.T2 / g.t_talbot;
    g.tau_mid = (g.T1 + 0.5 * g.dT) / g.t_talbot;
    for (int k = 0; k < 3; ++k) {
        const double t = seq.pulses[static_cast<std::size_t>(k)].fire_time_s -
                         seq.pulses[0].fire_time_s;
        g.x_eff[static_cast<std::size_t>(k)] =
            env.offsets[static_cast<std::size_t>(k)] - 0.5 * env.acceleration * t * t;
        g.tilt_arm[static_cast<std::size_t>(k)] =
            1.0 - std::cos(seq.pulses[static_cast<std::size_t>(k)].tilt_theta);
    }
    return g;
}

// Mean transmission of pulse k at a given absorption scale.
inline double mean_transmission(const GratingPulse& p, double n0_scale) {
    return mask_coefficient(0, n0_scale * p.n0, p.modulation);
}

} // namespace detail

// Continuous-ensemble (and classical) harmonic sum. Exact for a Gaussian
// transverse ensemble: every off-echo velocity phase carries at least
// exp(-(G sigma_v T1)^2 / 2), which underflows to zero for any realistic
// spread, leaving precisely these terms.
inline SignalBreakdown harmonic_echo_signal(const PulseSequence& seq, const ClusterSpecies& sp,
                                            const BeamEnsemble& beam, const Environment& env,
                                            Model model, const SignalOptions& opt = {}) {
    env.validate();
    const detail::EchoGeometry g = detail::echo_geometry(seq, sp, env);
    const double eta = sp.yield.value;
    const GratingPulse& p1 = seq.pulses[0];
    const GratingPulse& p2 = seq.pulses[1];
    const GratingPulse& p3 = seq.pulses[2];

    const double H1 = detail::mean_transmission(p1, eta);
    const double H2 = detail::mean_transmission(p2, eta);
    const double H3 = detail::mean_transmission(p3, eta);

    SignalBreakdown out;
    if (is_classical(model)) {
        out.baseline = H1 * H2 * H3;
    } else {
        const double T1c = detail::mean_transmission(p1, 1.0);
        const double T2c = detail::mean_transmission(p2, 1.0);
        out.baseline = T1c * T2c * H3 + (H1 * H2 * H3 - T1c * T2c * H3);
    }

    const double mean_decay = std::isinf(env.height_decay_length)
                                  ? 1.0
                                  : std::exp(-(env.mount_height + beam.height.mean) /
                                             env.height_decay_length);

    double harmonic_scale = std::abs(out.baseline);
    int quiet = 0;
    for (int n = 1; n <= opt.max_harmonic; ++n) {
        double k1 = 0.0, k2 = 0.0;
        const double k3 = mask_coefficient(n, eta * p3.n0, p3.modulation);
        if (is_classical(model)) {
            const double xi_mid = (opt.timing_kernel == TimingKernel::echo_exact) ? g.xi2 : g.tau_mid;
            k1 = mask_coefficient(n, eta * p1.n0, p1.modulation);
            k2 = classical_coefficient(2 * n, n * xi_mid, eta * p2.n0, p2.phi0, p2.modulation,
                                       strategy_of(model));
        } else if (opt.timing_kernel == TimingKernel::echo_exact) {
            k1 = talbot_coefficient(n, n * (g.xi1 - g.xi2), p1.n0, p1.phi0, p1.modulation);
            k2 = talbot_coefficient(2 * n, n * g.xi2, p2.n0, p2.phi0, p2.modulation);
        } else {
            k1 = mask_coefficient(n, p1.n0, p1.modulation);
            k2 = talbot_coefficient(2 * n, n * g.tau_mid, p2.n0, p2.phi0, p2.modulation);
        }

        const double kern = k1 * k2 * k3;
        const cplx W = beam.transverse.characteristic(n * g.G * g.dT);
        const double chi = n * g.G *
                           (2.0 * g.tilt_arm[1] - g.tilt_arm[0] - g.tilt_arm[2]);
        // Height enters relative to the mirror pivot: mount height plus the
        // in-beam profile.
        const cplx Z = std::exp(cplx{0.0, chi * env.mount_height}) * beam.height.characteristic(chi);
        const double phi = -n * g.G * (g.x_eff[0] - 2.0 * g.x_eff[1] + g.x_eff[2]);
        const cplx rot{std::cos(phi), std::sin(phi)};

        const double term = 2.0 * std::real(kern * W * Z * rot) * mean_decay;
        out.modulation += term;

        harmonic_scale = std::max(harmonic_scale, std::abs(out.modulation));
        if (std::abs(kern) < opt.term_tolerance * harmonic_scale) {
            if (++quiet >= 3) return out;
        } else {
            quiet = 0;
        }
    }
    if (quiet == 0)
        throw convergence_error("harmonic_echo_signal: harmonic sum did not converge at the cap");
    return out;
}

// Exact plane-wave sum for a discrete velocity comb, quantum model. Off-echo
// amplitude pairs of the first pulse survive a finite comb at O(1), so the
// full (m, m') double sum is kept; the middle pulse enters through
//     Tgen(c, theta) = sum_l b_l^(2) conj(b_{l+c}^(2)) e^{i theta l},
// evaluated at theta = 2 pi xi2 n.
inline SignalBreakdown discrete_plane_wave_signal(const PulseSequence& seq,
                                                  const ClusterSpecies& sp,
                                                  const BeamEnsemble& beam,
                                                  const Environment& env,
                                                  const SignalOptions& opt = {}) {
    env.validate();
    if (!beam.transverse.discrete())
        throw std::logic_error("discrete_plane_wave_signal: ensemble is not a velocity comb");
    const detail::EchoGeometry g = detail::echo_geometry(seq, sp, env);
    const double eta = sp.yield.value;
    const GratingPulse& p1 = seq.pulses[0];
    const GratingPulse& p2 = seq.pulses[1];
    const GratingPulse& p3 = seq.pulses[2];

    const AmplitudeTable b1 = amplitude_coefficients(p1.n0, p1.phi0, p1.modulation);
    const AmplitudeTable b2 = amplitude_coefficients(p2.n0, p2.phi0, p2.modulation);
    // Harmonic reach of the final mask bounds the useful |n|.
    const int n_max = std::min(opt.max_harmonic,
                               amplitude_coefficients(eta * p3.n0, 0.0, p3.modulation).m_max);

    const double H1 = detail::mean_transmission(p1, eta);
    const double H2 = detail::mean_transmission(p2, eta);
    const double H3 = detail::mean_transmission(p3, eta);
    const double T1c = detail::mean_transmission(p1, 1.0);
    const double T2c = detail::mean_transmission(p2, 1.0);
    const double pedestal = H1 * H2 * H3 - T1c * T2c * H3;

    const double mean_decay = std::isinf(env.height_decay_length)
                                  ? 1.0
                                  : std::exp(-(env.mount_height + beam.height.mean) /
                                             env.height_decay_length);

    std::vector<double> mask3(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n)
        mask3[static_cast<std::size_t>(n)] = mask_coefficient(n, eta * p3.n0, p3.modulation);

    const int c_max = 2 * b2.m_max;
    std::vector<cplx> tgen(static_cast<std::size_t>(2 * c_max) + 1);

    cplx baseline_acc{0.0, 0.0};
    cplx modulation_acc{0.0, 0.0};
    for (int n = -n_max; n <= n_max; ++n) {
        const double theta = 2.0 * constants::pi * g.xi2 * n;
        for (int c = -c_max; c <= c_max; ++c) {
            cplx acc{0.0, 0.0};
            for (int l = -b2.m_max; l <= b2.m_max; ++l) {
                const cplx prod = b2.amp(l) * std::conj(b2.amp(l + c));
                if (prod == cplx{0.0, 0.0}) continue;
                acc += prod * std::polar(1.0, theta * l);
            }
            tgen[static_cast<std::size_t>(c + c_max)] = acc;
        }

        const double a3 = mask3[static_cast<std::size_t>(std::abs(n))];
        if (a3 == 0.0) continue;
        const cplx head = a3 *
                          std::polar(1.0, -n * g.G * g.x_eff[2] +
                                              constants::pi * g.xi2 * static_cast<double>(n) * n);

        for (const auto& cls : beam.transverse.classes) {
            const cplx vel_head = std::polar(1.0, n * g.G * cls.velocity * g.T2);
            cplx pair_sum{0.0, 0.0};
            for (int m = -b1.m_max; m <= b1.m_max; ++m) {
                const cplx bm = b1.amp(m);
                if (bm == cplx{0.0, 0.0}) continue;
                for (int mp = -b1.m_max; mp <= b1.m_max; ++mp) {
                    const int c = n + m - mp;
                    if (c < -c_max || c > c_max) continue;
                    const cplx t2f = tgen[static_cast<std::size_t>(c + c_max)];
                    if (t2f == cplx{0.0, 0.0}) continue;
                    const cplx bmp = std::conj(b1.amp(mp));
                    if (bmp == cplx{0.0, 0.0}) continue;
                    const int d = m - mp;
                    double ph = -d * g.G * (g.x_eff[0] + cls.velocity * g.T1);
                    ph -= constants::pi * g.xi1 * static_cast<double>(m * m - mp * mp);
                    ph += c * g.G * g.x_eff[1];
                    ph += 2.0 * constants::pi * g.xi2 * n * m;
                    const double chi = g.G * (-d * g.tilt_arm[0] + c * g.tilt_arm[1] -
                                              n * g.tilt_arm[2]);
                    const cplx Z = std::polar(1.0, chi * env.mount_height) *
                                   beam.height.characteristic(chi);
                    pair_sum += bm * bmp * t2f * std::polar(1.0, ph) * Z;
                }
            }
            const cplx term = cls.weight * head * vel_head * pair_sum;
            if (n == 0) baseline_acc += term;
            else modulation_acc += term * mean_decay;
        }
    }

    SignalBreakdown out;
    out.baseline = std::real(baseline_acc) + pedestal;
    out.modulation = std::real(modulation_acc);
    return out;
}

// Entry point: routes to the exact plane-wave sum when the quantum model
// meets a velocity comb, and to the harmonic echo sum otherwise.
inline SignalBreakdown three_pulse_signal(const PulseSequence& seq, const ClusterSpecies& sp,
                                          const BeamEnsemble& beam, const Environment& env,
                                          Model model = Model::quantum,
                                          const SignalOptions& opt = {}) {
    if (model == Model::quantum && beam.transverse.discrete())
        return discrete_plane_wave_signal(seq, sp, beam, env, opt);
    return harmonic_echo_signal(seq, sp, beam, env, model, opt);
}

} // namespace tdli

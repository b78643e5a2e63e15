#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "tdli/bessel.hpp"
#include "tdli/constants.hpp"
#include "tdli/errors.hpp"

// Fourier algebra of a pulsed optical grating.
//
// A standing-wave pulse multiplies the wavefunction by the periodic profile
//     t(x) = exp[ (i*phi0 - n0/2) * (1 + V cos(G x)) / 2 ],
// where n0 counts absorbed photons at an antinode (amplitude mask), phi0 is
// the peak phase imprint, and V in [0,1] is the standing-wave modulation.
// With zeta = i*phi0 - n0/2 the Fourier expansion t(x) = sum_m b_m e^{i m G x}
// has
//     b_m = e^{zeta/2} I_m(V zeta / 2).
//
// Three derived coefficient families drive every observable:
//   mask     A_n = sum_m b_m conj(b_{m-n}) = e^{-n0/2} (-1)^n I_n(V n0 / 2),
//            the plain transmission harmonics (no free flight involved);
//   talbot   B_n(xi) = sum_m b_m conj(b_{m-n}) e^{i pi xi (n - 2m)},
//            the same convolution dressed with quadratic free-flight phases,
//            xi = t / t_talbot; B_n(0) = A_n;
//   classical C_n(xi), the ray-optics analogue of B_n obtained by treating
//            the grating as a transmission mask plus a momentum kick.
//
// B_n collapses to a closed form without branch cuts: with
//     nu = (n0/2) cos(pi xi),  mu = phi0 sin(pi xi),
//     w  = (V^2/4) (nu^2 - mu^2),
// and redI_n the entire reduced Bessel series (bessel.hpp),
//     B_{+n}(xi) = e^{-n0/2} [ -(V/2)(nu - mu) ]^n redI_n(w),   n >= 0,
//     B_{-n}(xi) = e^{-n0/2} [ -(V/2)(nu + mu) ]^n redI_n(w).
// B_n is real, and B_{-n} = (-1)^n B_n. The classical kernels reuse the same
// form with (nu, mu) replaced by their ray-optics limits (see strategies
// below). The direct convolution sum is kept alongside as an internal
// cross-check path for the tests.

namespace tdli {

// Ray-optics reduction of the Talbot kernel. "moire" is the exact expectation
// of the stochastic trajectory model (mask, momentum kick, drift): the cos
// factor drops entirely and sin(pi xi) -> pi xi. "sin_linearized" keeps the
// cos factor and linearizes only the sine; it converges to the quantum kernel
// as xi -> 0 faster than the trajectory model does.
enum class ClassicalStrategy { moire, sin_linearized };

inline cplx grating_zeta(double n0, double phi0) { return cplx{-0.5 * n0, phi0}; }

// Fourier amplitudes b_m of one grating pulse, m in [-m_max, m_max].
struct AmplitudeTable {
    std::vector<cplx> b; // index m + m_max
    int m_max = 0;

    cplx amp(int m) const {
        const int i = m + m_max;
        if (i < 0 || i > 2 * m_max) return cplx{0.0, 0.0};
        return b[static_cast<std::size_t>(i)];
    }
};

namespace detail {

inline AmplitudeTable amplitude_table_fixed(double n0, double phi0, double V, int m_max) {
    const cplx z = 0.5 * V * grating_zeta(n0, phi0);
    const cplx pref = std::exp(0.5 * grating_zeta(n0, phi0));
    const std::vector<cplx> im = bessel_i_table(m_max, z);
    AmplitudeTable t;
    t.m_max = m_max;
    t.b.assign(static_cast<std::size_t>(2 * m_max) + 1, cplx{0.0, 0.0});
    for (int m = -m_max; m <= m_max; ++m)
        t.b[static_cast<std::size_t>(m + m_max)] = pref * im[static_cast<std::size_t>(std::abs(m))];
    return t;
}

} // namespace detail

// Builds b_m with an automatically enlarged cutoff: starting from
// m_max = max(8, ceil(3 (n0 + phi0))), grow until the edge coefficient is
// below 1e-12 of the largest one. A cap of 256 guards against runaway
// parameters; hitting it is a convergence_error, never a silent truncation.
inline AmplitudeTable amplitude_coefficients(double n0, double phi0, double V) {
    if (n0 < 0.0) throw std::domain_error("amplitude_coefficients: n0 must be >= 0");
    if (V < 0.0 || V > 1.0) throw std::domain_error("amplitude_coefficients: V must be in [0, 1]");
    int m_max = std::max(8, static_cast<int>(std::ceil(3.0 * (n0 + std::abs(phi0)))));
    constexpr int cap = 256;
    for (;;) {
        m_max = std::min(m_max, cap);
        AmplitudeTable t = detail::amplitude_table_fixed(n0, phi0, V, m_max);
        double peak = 0.0;
        for (const auto& v : t.b) peak = std::max(peak, std::abs(v));
        const double edge = std::abs(t.b.front());
        if (peak == 0.0 || edge <= 1e-12 * peak) return t;
        if (m_max >= cap)
            throw convergence_error("amplitude_coefficients: cutoff cap reached before tail decayed");
        m_max = std::min(cap, 2 * m_max);
    }
}

// A_n = e^{-n0/2} (-1)^n I_n(V n0 / 2); real, A_{-n} = A_n, A_n(n0 = 0) = delta_n0.
inline double mask_coefficient(int n, double n0, double V) {
    if (n0 < 0.0) throw std::domain_error("mask_coefficient: n0 must be >= 0");
    if (V < 0.0 || V > 1.0) throw std::domain_error("mask_coefficient: V must be in [0, 1]");
    const int an = std::abs(n);
    const double sign = (an % 2 == 0) ? 1.0 : -1.0;
    const cplx val = bessel_i(an, cplx{0.5 * V * n0, 0.0});
    return std::exp(-0.5 * n0) * sign * std::real(val);
}

namespace detail {

// Shared closed form: e^{-n0/2} [-(V/2)(nu -+ mu)]^|n| redI_|n|((V^2/4)(nu^2 - mu^2)).
// The factors are combined in log space: c^|n| alone overflows for the large
// classical arguments mu ~ phi0 pi n xi even though the product stays bounded.
// For w < -9 the alternating redI series cancels badly and the identity
// redI_n(w) = |w|^{-n/2} J_n(2 sqrt(|w|)) takes over.
inline double dressed_kernel(int n, double n0, double V, double nu, double mu) {
    const int an = std::abs(n);
    const double c = (n >= 0) ? -(0.5 * V) * (nu - mu) : -(0.5 * V) * (nu + mu);
    const double w = (0.25 * V * V) * (nu * nu - mu * mu);
    if (an > 0 && c == 0.0) return 0.0;
    const double sign_c = (c < 0.0 && an % 2 == 1) ? -1.0 : 1.0;

    if (w >= -9.0) {
        // redI_|n|(w) scaled by |n|! so the leading term is 1.
        double term = 1.0, sum = 1.0;
        for (int j = 1; j <= 400; ++j) {
            term *= w / (static_cast<double>(j) * static_cast<double>(j + an));
            sum += term;
            if (std::abs(term) <= 1e-18 * std::abs(sum) + 1e-320) break;
        }
        if (sum == 0.0) return 0.0;
        const double log_mag = -0.5 * n0 + an * std::log(std::abs(c)) -
                               std::lgamma(an + 1.0) + std::log(std::abs(sum));
        const double sign_s = sum < 0.0 ? -1.0 : 1.0;
        return an == 0 ? std::exp(-0.5 * n0) * sum : sign_c * sign_s * std::exp(log_mag);
    }
    const double x = std::sqrt(-w); // c^|n| redI = (c/x)^|n| J_|n|(2x)
    const double j_val = std::cyl_bessel_j(static_cast<double>(an), 2.0 * x);
    if (j_val == 0.0) return 0.0;
    const double log_mag =
        -0.5 * n0 + an * std::log(std::abs(c) / x) + std::log(std::abs(j_val));
    const double sign_j = j_val < 0.0 ? -1.0 : 1.0;
    return sign_c * sign_j * std::exp(log_mag);
}

} // namespace detail

// Quantum Talbot coefficient B_n(xi), xi = pulse separation in Talbot times.
inline double talbot_coefficient(int n, double xi, double n0, double phi0, double V) {
    if (n0 < 0.0) throw std::domain_error("talbot_coefficient: n0 must be >= 0");
    if (V < 0.0 || V > 1.0) throw std::domain_error("talbot_coefficient: V must be in [0, 1]");
    const double nu = 0.5 * n0 * std::cos(constants::pi * xi);
    const double mu = phi0 * std::sin(constants::pi * xi);
    return detail::dressed_kernel(n, n0, V, nu, mu);
}

// Classical (ray-optics) counterpart C_n(xi) of B_n(xi).
inline double classical_coefficient(int n, double xi, double n0, double phi0, double V,
                                    ClassicalStrategy strategy = ClassicalStrategy::moire) {
    if (n0 < 0.0) throw std::domain_error("classical_coefficient: n0 must be >= 0");
    if (V < 0.0 || V > 1.0) throw std::domain_error("classical_coefficient: V must be in [0, 1]");
    const double mu = phi0 * constants::pi * xi;
    const double nu = (strategy == ClassicalStrategy::moire)
                          ? 0.5 * n0
                          : 0.5 * n0 * std::cos(constants::pi * xi);
    return detail::dressed_kernel(n, n0, V, nu, mu);
}

// Direct convolution forms, used by the unit tests to pin the closed-form
// kernels against the raw amplitude table. Slower but assumption-free.
inline cplx talbot_coefficient_series(int n, double xi, const AmplitudeTable& t) {
    cplx sum{0.0, 0.0};
    for (int m = -t.m_max; m <= t.m_max; ++m) {
        const cplx prod = t.amp(m) * std::conj(t.amp(m - n));
        if (prod == cplx{0.0, 0.0}) continue;
        const double ph = constants::pi * xi * static_cast<double>(n - 2 * m);
        sum += prod * cplx{std::cos(ph), std::sin(ph)};
    }
    return sum;
}

inline cplx mask_coefficient_series(int n, const AmplitudeTable& t) {
    return talbot_coefficient_series(n, 0.0, t);
}

// Inverts A_0(n0) = e^{-n0/2} I_0(V n0 / 2) for n0 given a measured mean
// transmission. A_0 is strictly decreasing in n0 (for V < 1 strictly; at
// V = 1 it still decays like 1/sqrt(pi n0)), so bisection is safe.
inline double infer_n0_from_transmission(double a0_target, double V) {
    if (V < 0.0 || V > 1.0) throw std::domain_error("infer_n0_from_transmission: V must be in [0, 1]");
    if (!(a0_target > 0.0) || a0_target > 1.0)
        throw std::domain_error("infer_n0_from_transmission: transmission must be in (0, 1]");
    if (a0_target == 1.0) return 0.0;
    auto a0 = [V](double n0) { return mask_coefficient(0, n0, V); };
    double lo = 0.0, hi = 1.0;
    int guard = 0;
    while (a0(hi) > a0_target) {
        hi *= 2.0;
        if (++guard > 64) throw convergence_error("infer_n0_from_transmission: bracket failed");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (a0(mid) > a0_target) lo = mid; else hi = mid;
        if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

} // namespace tdli

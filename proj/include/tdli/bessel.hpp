#pragma once

#include <cmath>
#include <complex>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "tdli/errors.hpp"

// Modified Bessel functions I_m(z) of integer order and complex argument.
// The grating coefficient algebra needs them for z = V*zeta/2 with
// zeta = i*phi0 - n0/2, so Re z <= 0 throughout this library.
//
// Strategy: ascending power series for |z| <= 8; Miller backward recurrence
// above, normalized against exp(+z) (Re z >= 0) or exp(-z) (Re z < 0) so the
// normalizing sum never suffers exponential cancellation. Accuracy target is
// 1e-13 relative against direct quadrature of the defining integral; the test
// suite enforces it.

namespace tdli {

using cplx = std::complex<double>;

namespace detail {

// sum_{k>=0} (z^2/4)^k / (k! (k+m)!) * (z/2)^m, m >= 0.
inline cplx bessel_i_series(int m, cplx z) {
    if (z == cplx{0.0, 0.0}) return m == 0 ? cplx{1.0, 0.0} : cplx{0.0, 0.0};
    // (z/2)^m / m! computed in log space to survive large m at small |z|.
    cplx term;
    {
        const cplx half_z = 0.5 * z;
        const double log_mag = static_cast<double>(m) * std::log(std::abs(half_z)) - std::lgamma(m + 1.0);
        if (log_mag < -745.0) return cplx{0.0, 0.0}; // below double range: I_m underflows
        const double arg = static_cast<double>(m) * std::arg(half_z);
        term = std::exp(log_mag) * cplx{std::cos(arg), std::sin(arg)};
    }
    const cplx q = 0.25 * z * z;
    cplx sum = term;
    for (int k = 1; k <= 400; ++k) {
        term *= q / (static_cast<double>(k) * static_cast<double>(k + m));
        sum += term;
        if (std::abs(term) <= 1e-18 * std::abs(sum) + 1e-320) return sum;
    }
    throw convergence_error("bessel_i series did not converge");
}

// Backward (Miller) recurrence: fills orders 0..m_max for one z, |z| > 8.
inline std::vector<cplx> bessel_i_miller(int m_max, cplx z) {
    const double az = std::abs(z);
    const int start = m_max + static_cast<int>(az) + 40 +
                      static_cast<int>(2.0 * std::sqrt(static_cast<double>(m_max) + az));
    std::vector<cplx> f(static_cast<std::size_t>(m_max) + 1, cplx{0.0, 0.0});
    const bool flip = std::real(z) < 0.0; // normalize against exp(-z): alternating sum stays O(1)
    cplx f_above{0.0, 0.0};          // f_{start+1}
    cplx f_here{1e-280, 0.0};        // f_{start}, arbitrary seed
    cplx s{0.0, 0.0};                // running sum of 2*(+-1)^k f_k for k >= 1
    if (start <= m_max + 1) throw convergence_error("bessel_i_miller: start order too small");
    for (int k = start; k >= 1; --k) {
        if (k <= m_max) f[static_cast<std::size_t>(k)] = f_here;
        s += (flip && (k % 2 == 1)) ? -2.0 * f_here : 2.0 * f_here;
        cplx f_below = f_above + (2.0 * k / z) * f_here;
        f_above = f_here;
        f_here = f_below;
        const double mag = std::abs(f_here);
        if (mag > 1e250) { // rescale everything accumulated so far
            const double inv = 1e-250;
            f_here *= inv;
            f_above *= inv;
            s *= inv;
            for (auto& v : f) v *= inv;
        }
    }
    s += f_here; // k = 0 term enters once
    f[0] = f_here;
    const cplx target = flip ? std::exp(-z) : std::exp(z);
    if (s == cplx{0.0, 0.0}) throw convergence_error("bessel_i_miller: normalization collapsed");
    const cplx scale = target / s;
    for (auto& v : f) v *= scale;
    return f;
}

} // namespace detail

// I_m(z) for all orders m = 0..m_max at once (the table is what the
// coefficient algebra consumes). I_{-m} = I_m for integer order.
inline std::vector<cplx> bessel_i_table(int m_max, cplx z) {
    if (m_max < 0) throw std::domain_error("bessel_i_table: m_max must be >= 0");
    if (std::abs(z) <= 8.0) {
        std::vector<cplx> out(static_cast<std::size_t>(m_max) + 1);
        for (int m = 0; m <= m_max; ++m) out[static_cast<std::size_t>(m)] = detail::bessel_i_series(m, z);
        return out;
    }
    return detail::bessel_i_miller(m_max, z);
}

inline cplx bessel_i(int m, cplx z) {
    const int am = std::abs(m);
    if (std::abs(z) <= 8.0) return detail::bessel_i_series(am, z);
    return detail::bessel_i_miller(am, z)[static_cast<std::size_t>(am)];
}

// Entire "reduced" function  redI_n(w) = sum_{j>=0} w^j / (j! (j+n)!)
// = I_n(2 sqrt(w)) / w^{n/2}. It carries the Talbot-kernel closed form
// without square-root branch ambiguity.
inline cplx reduced_bessel_i(int n, cplx w) {
    if (n < 0) throw std::domain_error("reduced_bessel_i: order must be >= 0");
    double log_t0 = -std::lgamma(n + 1.0);
    if (log_t0 < -745.0) return cplx{0.0, 0.0}; // 1/n! below double range
    cplx term{std::exp(log_t0), 0.0};
    cplx sum = term;
    for (int j = 1; j <= 400; ++j) {
        term *= w / (static_cast<double>(j) * static_cast<double>(j + n));
        sum += term;
        if (std::abs(term) <= 1e-18 * std::abs(sum) + 1e-320) return sum;
    }
    throw convergence_error("reduced_bessel_i did not converge");
}

} // namespace tdli

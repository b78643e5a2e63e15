#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "tdli/constants.hpp"
#include "tdli/errors.hpp"

// Small dense least-squares fitter for scan readouts: Levenberg-Marquardt
// with a forward-difference Jacobian and a damping ladder. The model sizes
// here are tiny (3-5 parameters, tens of points), so there is no need for
// anything heavier than Gaussian elimination on the normal equations.
//
// Nonlinear fits are seeded by a coarse grid search; failure to converge is
// reported through a flag while still carrying the best parameters seen.

namespace tdli {

struct FitResult {
    std::vector<double> params;
    double rss = std::numeric_limits<double>::infinity(); // residual sum of squares
    int iterations = 0;
    bool converged = false;
};

using FitModel = std::function<double(double x, const std::vector<double>& p)>;

namespace detail {

// Solves A x = b in place; A is n x n row-major. Partial pivoting.
inline bool solve_dense(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
        if (std::fabs(a[piv * n + col]) < 1e-300) return false;
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
            std::swap(b[piv], b[col]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] / a[col * n + col];
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t ri = n; ri-- > 0;) {
        double s = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) s -= a[ri * n + c] * b[c];
        b[ri] = s / a[ri * n + ri];
    }
    return true;
}

inline double residual_norm(const FitModel& model, const std::vector<double>& x,
                            const std::vector<double>& y, const std::vector<double>& p) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - model(x[i], p);
        rss += r * r;
    }
    return rss;
}

} // namespace detail

inline FitResult fit_least_squares(const FitModel& model, const std::vector<double>& x,
                                   const std::vector<double>& y, std::vector<double> p0,
                                   int max_iterations = 200, double tol = 1e-14) {
    if (x.size() != y.size()) throw std::invalid_argument("fit: x/y size mismatch");
    const std::size_t n = x.size();
    const std::size_t k = p0.size();
    if (n < k) throw std::invalid_argument("fit: fewer points than parameters");

    FitResult res;
    res.params = p0;
    res.rss = detail::residual_norm(model, x, y, p0);

    double lambda = 1e-3;
    std::vector<double> jac(n * k), r(n);

    for (int it = 0; it < max_iterations; ++it) {
        res.iterations = it + 1;
        for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - model(x[i], res.params);
        for (std::size_t j = 0; j < k; ++j) {
            const double h = 1e-7 * std::max(1.0, std::fabs(res.params[j]));
            std::vector<double> pp = res.params;
            pp[j] += h;
            for (std::size_t i = 0; i < n; ++i)
                jac[i * k + j] = (model(x[i], pp) - (y[i] - r[i])) / h;
        }

        // Normal equations (J^T J + lambda diag) dp = J^T r.
        std::vector<double> jtj(k * k, 0.0), jtr(k, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t a = 0; a < k; ++a) {
                jtr[a] += jac[i * k + a] * r[i];
                for (std::size_t b = a; b < k; ++b) jtj[a * k + b] += jac[i * k + a] * jac[i * k + b];
            }
        }
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < a; ++b) jtj[a * k + b] = jtj[b * k + a];

        bool improved = false;
        for (int attempt = 0; attempt < 12 && !improved; ++attempt) {
            std::vector<double> lhs = jtj, rhs = jtr;
            for (std::size_t a = 0; a < k; ++a) lhs[a * k + a] += lambda * std::max(jtj[a * k + a], 1e-12);
            if (detail::solve_dense(lhs, rhs, k)) {
                std::vector<double> pn = res.params;
                for (std::size_t a = 0; a < k; ++a) pn[a] += rhs[a];
                const double rss_new = detail::residual_norm(model, x, y, pn);
                if (rss_new < res.rss) {
                    const double drop = res.rss - rss_new;
                    res.params = pn;
                    res.rss = rss_new;
                    lambda = std::max(lambda * 0.3, 1e-12);
                    improved = true;
                    if (drop < tol * (1.0 + res.rss)) res.converged = true;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if (res.converged) return res;
        if (!improved) {
            // The damping ladder is exhausted: no step, however small,
            // lowers the residual, so this is a numerical minimum. That
            // includes a seed that already sits on the optimum.
            res.converged = true;
            return res;
        }
    }
    res.converged = true;
    return res;
}

// y = offset + amplitude exp(-(x - center)^2 / (2 sigma^2)).
struct GaussianFit {
    double amplitude = 0.0;
    double center = 0.0;
    double sigma = 0.0;
    double offset = 0.0;
    double rss = 0.0;
    bool converged = false;
    double fwhm() const { return 2.0 * std::sqrt(2.0 * std::log(2.0)) * sigma; }
};

inline GaussianFit fit_gaussian(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() < 8) throw std::invalid_argument("fit_gaussian: need at least 8 points");
    const FitModel model = [](double xv, const std::vector<double>& p) {
        const double dz = (xv - p[1]) / p[2];
        return p[3] + p[0] * std::exp(-0.5 * dz * dz);
    };
    double ymin = y[0], ymax = y[0];
    std::size_t imax = 0, imin = 0;
    for (std::size_t i = 1; i < y.size(); ++i) {
        if (y[i] > ymax) { ymax = y[i]; imax = i; }
        if (y[i] < ymin) { ymin = y[i]; imin = i; }
    }
    const double span = std::fabs(x.back() - x.front());
    // Seed both a peak and a dip over a width grid; keep the best fit.
    FitResult best;
    for (const bool dip : {false, true}) {
        const std::size_t ic = dip ? imin : imax;
        const double amp = dip ? ymin - ymax : ymax - ymin;
        const double base = dip ? ymax : ymin;
        for (const double frac : {0.05, 0.1, 0.25, 0.5}) {
            FitResult f = fit_least_squares(model, x, y, {amp, x[ic], frac * span, base});
            if (f.rss < best.rss) best = f;
        }
    }
    GaussianFit g;
    g.amplitude = best.params[0];
    g.center = best.params[1];
    g.sigma = std::fabs(best.params[2]);
    g.offset = best.params[3];
    g.rss = best.rss;
    g.converged = best.converged;
    return g;
}

// y = offset + amplitude exp(-x q) cos(2 pi x / period + phase), q = 1/decay.
// The decay parameter is reported as a length; q = 0 (no damping) maps to
// decay = infinity.
struct DampedSineFit {
    double period = 0.0;
    double phase = 0.0; // radians, in (-pi, pi]
    double decay = std::numeric_limits<double>::infinity();
    double amplitude = 0.0;
    double offset = 0.0;
    double rss = 0.0;
    bool converged = false;
};

namespace detail {

// At fixed period and damping rate the model is linear in
// (a, b, c): y = e^{-q x} (a cos w x + b sin w x) + c.
inline bool damped_sine_linear(const std::vector<double>& x, const std::vector<double>& y,
                               double period, double q, double out[3], double& rss) {
    const double w = 2.0 * constants::pi / period;
    std::vector<double> m(9, 0.0), rhs(3, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = std::exp(-q * x[i]);
        const double basis[3] = {e * std::cos(w * x[i]), e * std::sin(w * x[i]), 1.0};
        for (int a = 0; a < 3; ++a) {
            rhs[a] += basis[a] * y[i];
            for (int b = 0; b < 3; ++b) m[a * 3 + b] += basis[a] * basis[b];
        }
    }
    if (!solve_dense(m, rhs, 3)) return false;
    rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = std::exp(-q * x[i]);
        const double f = e * (rhs[0] * std::cos(w * x[i]) + rhs[1] * std::sin(w * x[i])) + rhs[2];
        rss += (y[i] - f) * (y[i] - f);
    }
    out[0] = rhs[0];
    out[1] = rhs[1];
    out[2] = rhs[2];
    return true;
}

} // namespace detail

inline DampedSineFit fit_damped_sine(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() < 8) throw std::invalid_argument("fit_damped_sine: need at least 8 points");
    const double span = std::fabs(x.back() - x.front());
    if (!(span > 0.0)) throw std::invalid_argument("fit_damped_sine: degenerate abscissa");

    // Grid-seed the two nonlinear parameters (period, damping rate) on the
    // linear subproblem, then polish everything with LM. Period candidates
    // range from two points per cycle up to twice the scan span.
    double best_rss = std::numeric_limits<double>::infinity();
    double seed[5] = {0, 0, 0, 0, 0}; // a, b, c, period, q
    const int period_steps = 96;
    const double p_lo = 2.2 * span / static_cast<double>(x.size());
    const double p_hi = 2.0 * span;
    for (int ip = 0; ip <= period_steps; ++ip) {
        const double period = p_lo * std::pow(p_hi / p_lo, static_cast<double>(ip) / period_steps);
        for (const double ql : {0.0, 0.5, 1.0, 2.0, 4.0}) {
            const double q = ql / span;
            double lin[3], rss;
            if (!detail::damped_sine_linear(x, y, period, q, lin, rss)) continue;
            if (rss < best_rss) {
                best_rss = rss;
                seed[0] = lin[0];
                seed[1] = lin[1];
                seed[2] = lin[2];
                seed[3] = period;
                seed[4] = q;
            }
        }
    }
    if (!std::isfinite(best_rss)) throw convergence_error("fit_damped_sine: seeding failed");

    // Parametrize as {A, period, phase, q, offset} with
    // a cos + b sin = A cos(w x + phase), phase = -atan2(b, a).
    const FitModel model = [](double xv, const std::vector<double>& p) {
        const double w = 2.0 * constants::pi / p[1];
        return p[4] + p[0] * std::exp(-p[3] * xv) * std::cos(w * xv + p[2]);
    };
    const std::vector<double> p0 = {std::hypot(seed[0], seed[1]), seed[3],
                                    -std::atan2(seed[1], seed[0]), seed[4], seed[2]};
    FitResult f = fit_least_squares(model, x, y, p0);

    DampedSineFit d;
    d.amplitude = f.params[0];
    d.period = std::fabs(f.params[1]);
    d.phase = f.params[2];
    if (d.amplitude < 0.0) {
        d.amplitude = -d.amplitude;
        d.phase += constants::pi;
    }
    d.phase = std::remainder(d.phase, 2.0 * constants::pi);
    d.decay = f.params[3] > 1e-300 ? 1.0 / f.params[3] : std::numeric_limits<double>::infinity();
    d.offset = f.params[4];
    d.rss = f.rss;
    d.converged = f.converged;
    return d;
}

// y = c + A cos(2 pi (x - x0) / period) with the period held fixed; linear in
// (a, b, c), so the solution is exact. Used to read fringe phase off an
// offset scan.
struct FringeFit {
    double amplitude = 0.0;
    double phase_offset = 0.0; // x0, reduced to [0, period)
    double mean = 0.0;
    double rss = 0.0;
};

inline FringeFit fit_fringe(const std::vector<double>& x, const std::vector<double>& y,
                            double period) {
    if (x.size() < 4) throw std::invalid_argument("fit_fringe: need at least 4 points");
    if (!(period > 0.0)) throw std::domain_error("fit_fringe: period must be positive");
    const double w = 2.0 * constants::pi / period;
    std::vector<double> m(9, 0.0), rhs(3, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double basis[3] = {std::cos(w * x[i]), std::sin(w * x[i]), 1.0};
        for (int a = 0; a < 3; ++a) {
            rhs[a] += basis[a] * y[i];
            for (int b = 0; b < 3; ++b) m[a * 3 + b] += basis[a] * basis[b];
        }
    }
    if (!detail::solve_dense(m, rhs, 3)) throw convergence_error("fit_fringe: singular system");
    const double a = rhs[0], b = rhs[1], c = rhs[2];
    FringeFit f;
    f.amplitude = std::hypot(a, b);
    f.mean = c;
    // a cos + b sin = amp cos(w (x - x0)) with w x0 = atan2(b, a).
    double x0 = std::atan2(b, a) / w;
    x0 = std::fmod(x0, period);
    if (x0 < 0.0) x0 += period;
    f.phase_offset = x0;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (a * std::cos(w * x[i]) + b * std::sin(w * x[i]) + c);
        rss += r * r;
    }
    f.rss = rss;
    return f;
}

// Phase displacement between two fringe scans sharing a period, folded into
// (-period/2, period/2].
inline double fringe_shift(const FringeFit& reference, const FringeFit& moved, double period) {
    return std::remainder(moved.phase_offset - reference.phase_offset, period);
}

} // namespace tdli
